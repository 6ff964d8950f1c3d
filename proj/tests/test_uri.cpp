#include "carbondate/uri.hpp"

#include <gtest/gtest.h>

#include <random>

#include "carbondate/error.hpp"

namespace carbondate {

TEST(Normalize, Basics) {
  EXPECT_EQ(normalize_uri("http://www.mementoweb.org").str(), "http://www.mementoweb.org/");
  EXPECT_EQ(normalize_uri("HTTP://WWW.Example.COM:80/a/./b/../c#frag").str(), "http://www.example.com/a/c");
  EXPECT_EQ(normalize_uri("https://example.com:443").str(), "https://example.com/");
  EXPECT_EQ(normalize_uri("https://example.com:8443/x?q=1").str(), "https://example.com:8443/x?q=1");
  EXPECT_EQ(normalize_uri("http://user:pw@example.com/").str(), "http://example.com/");
  EXPECT_EQ(normalize_uri("  http://example.com/  ").str(), "http://example.com/");
}

TEST(Normalize, PercentEscapes) {
  EXPECT_EQ(normalize_uri("http://example.com/%7euser/%2fx%2F").str(), "http://example.com/~user/%2Fx%2F");
  EXPECT_EQ(normalize_uri("http://example.com/a b").str(), "http://example.com/a%20b");
  EXPECT_EQ(normalize_uri("http://example.com/%41").str(), "http://example.com/A");
}

TEST(Normalize, KeepsEmptySegmentsAndQuery) {
  EXPECT_EQ(normalize_uri("http://example.com//a//b").str(), "http://example.com//a//b");
  EXPECT_EQ(normalize_uri("http://example.com/?a=1&&b").str(), "http://example.com/?a=1&&b");
  // An empty query carries nothing and is dropped.
  EXPECT_EQ(normalize_uri("http://example.com/?").str(), "http://example.com/");
}

TEST(Normalize, Rejects) {
  for (const char* bad : {"", "not a uri", "ftp://example.com/", "mailto:a@b.c", "http://", "http:///path",
                          "example.com/path", "http://exa mple.com/"}) {
    EXPECT_THROW(normalize_uri(bad), MalformedUri) << bad;
    EXPECT_FALSE(try_normalize_uri(bad)) << bad;
  }
}

TEST(Normalize, Idempotent) {
  std::mt19937 rng(7);
  const std::string alphabet = "abcXYZ019-._~%/?#=&:@!$'()*+,; ";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1), len(0, 24);
  for (int i = 0; i < 5000; ++i) {
    std::string raw = "http://host.example";
    if (i % 3) raw += "/";
    for (std::size_t n = len(rng); n; --n) raw += alphabet[pick(rng)];
    auto once = try_normalize_uri(raw);
    if (!once) continue;
    auto twice = normalize_uri(once->str());
    EXPECT_EQ(twice.str(), once->str()) << raw;
  }
}

TEST(Resolve, Forms) {
  auto base = normalize_uri("http://a.example/b/c/d;p?q");
  EXPECT_EQ(resolve_reference(base, "g"), "http://a.example/b/c/g");
  EXPECT_EQ(resolve_reference(base, "./g"), "http://a.example/b/c/g");
  EXPECT_EQ(resolve_reference(base, "../g"), "http://a.example/b/g");
  EXPECT_EQ(resolve_reference(base, "/g"), "http://a.example/g");
  EXPECT_EQ(resolve_reference(base, "//other.example/x"), "http://other.example/x");
  EXPECT_EQ(resolve_reference(base, "https://z.example/"), "https://z.example/");
  EXPECT_EQ(resolve_reference(base, "javascript:void(0)"), std::nullopt);
  EXPECT_EQ(resolve_reference(base, "mailto:x@y.z"), std::nullopt);
}

TEST(Percent, EncodeDecode) {
  EXPECT_EQ(percent_encode("http://www.mementoweb.org/"), "http%3A%2F%2Fwww.mementoweb.org%2F");
  EXPECT_EQ(percent_encode("a-b_c.d~e"), "a-b_c.d~e");
  EXPECT_EQ(percent_decode("not%20a%20uri"), "not a uri");
  EXPECT_EQ(percent_decode("%2541"), "%41");  // once only
  EXPECT_EQ(percent_decode("100%"), "100%");
  EXPECT_EQ(percent_decode("%zz"), "%zz");
  std::string all;
  for (int c = 0; c < 256; ++c) all += static_cast<char>(c);
  EXPECT_EQ(percent_decode(percent_encode(all)), all);
}

}  // namespace carbondate
