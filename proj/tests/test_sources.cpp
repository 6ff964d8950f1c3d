#include "carbondate/sources.hpp"

#include <gtest/gtest.h>

#include <map>
#include <mutex>

#include "carbondate/cassette.hpp"
#include "carbondate/error.hpp"

namespace carbondate {

using namespace std::chrono;

namespace {

UtcTimestamp at(int y, unsigned mo, unsigned d, int h = 0, int mi = 0, int s = 0) {
  return UtcTimestamp{sys_days{year{y} / mo / d}} + hours{h} + minutes{mi} + seconds{s};
}

// Canned responses keyed by "METHOD url"; anything else is a transport error.
class FakeTransport : public Transport {
 public:
  void on(std::string method, std::string url, HttpResponse r) { routes_[method + " " + url] = std::move(r); }

  HttpResponse send(const HttpRequest& req) override {
    std::lock_guard lock(mutex_);
    ++calls_;
    auto it = routes_.find(req.method + " " + req.url);
    if (it == routes_.end()) throw TransportError("no route for " + req.method + " " + req.url);
    return it->second;
  }

  int calls() const { return calls_; }

 private:
  std::map<std::string, HttpResponse> routes_;
  std::mutex mutex_;
  int calls_ = 0;
};

HttpResponse ok_json(std::string body) { return HttpResponse{200, {{"Content-Type", "application/json"}}, body}; }

const UpstreamEndpoints kEndpoints;
const CanonicalUri kUri = normalize_uri("http://a.example/page");
const PlausibilityWindow kWindow = PlausibilityWindow::ending_at(at(2013, 3, 1));

}  // namespace

TEST(Endpoints, Urls) {
  EXPECT_EQ(kEndpoints.timemap_url(kUri), "http://timetravel.mementoweb.org/timemap/link/http://a.example/page");
  EXPECT_EQ(kEndpoints.shortener_lookup_url(kUri),
            "https://api-ssl.bitly.com/v3/link/lookup?url=http%3A%2F%2Fa.example%2Fpage");
  EXPECT_EQ(kEndpoints.social_url(kUri), "http://otter.topsy.com/trackbacks.json?url=http%3A%2F%2Fa.example%2Fpage&perpage=500");
  EXPECT_EQ(kEndpoints.backlinks_url(kUri),
            "https://www.googleapis.com/customsearch/v1?q=link%3Ahttp%3A%2F%2Fa.example%2Fpage");
  UpstreamEndpoints keyed;
  keyed.search_key = "k&y";
  EXPECT_EQ(keyed.search_index_url(kUri),
            "https://www.googleapis.com/customsearch/v1?q=http%3A%2F%2Fa.example%2Fpage&dateRestrict=y15&key=k%26y");
}

TEST(LastModified, Cases) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("HEAD", kUri.str(), HttpResponse{200, {{"last-modified", "Fri, 20 Apr 2012 21:52:07 GMT"}}, ""});
  auto r = probe_last_modified(kUri, ctx);
  EXPECT_EQ(r.status, Status::ok);
  EXPECT_EQ(r.estimate, at(2012, 4, 20, 21, 52, 7));

  t.on("HEAD", kUri.str(), HttpResponse{200, {{"Last-Modified", "Thu, 01 Jan 1970 00:00:00 GMT"}}, ""});
  EXPECT_EQ(probe_last_modified(kUri, ctx).status, Status::empty);

  t.on("HEAD", kUri.str(), HttpResponse{200, {{"Last-Modified", "Sat, 01 Jan 2100 00:00:00 GMT"}}, ""});
  EXPECT_EQ(probe_last_modified(kUri, ctx).status, Status::empty);

  t.on("HEAD", kUri.str(), HttpResponse{200, {{"Last-Modified", "soon"}}, ""});
  EXPECT_EQ(probe_last_modified(kUri, ctx).status, Status::empty);

  t.on("HEAD", kUri.str(), HttpResponse{404, {}, ""});
  EXPECT_EQ(probe_last_modified(kUri, ctx).status, Status::empty);

  t.on("HEAD", kUri.str(), HttpResponse{503, {}, ""});
  EXPECT_EQ(probe_last_modified(kUri, ctx).status, Status::error);

  FakeTransport dead;
  SourceContext dead_ctx{dead, kWindow, kEndpoints};
  EXPECT_EQ(probe_last_modified(kUri, dead_ctx).status, Status::error);
}

TEST(Archives, EarliestAcrossArchivesWithOriginalHeaders) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.timemap_url(kUri),
       HttpResponse{200, {},
                    "<http://a.example/page>; rel=\"original\",\n"
                    "<http://x.example/1/http://a.example/page>; rel=\"memento\"; datetime=\"Mon, 01 Jan 1901 00:00:00 GMT\",\n"
                    "<http://y.example/2/http://a.example/page>; rel=\"memento\"; datetime=\"Fri, 02 Apr 2010 00:00:00 GMT\",\n"
                    "<http://z.example/3/http://a.example/page>; rel=\"memento\"; datetime=\"Sat, 03 Apr 2010 00:00:00 GMT\",\n"
                    "<http://y.example/4/http://a.example/page>; rel=\"memento\"; datetime=\"Sun, 04 Apr 2010 00:00:00 GMT\"\n"});
  t.on("HEAD", "http://y.example/2/http://a.example/page", HttpResponse{200, {}, ""});
  t.on("HEAD", "http://z.example/3/http://a.example/page",
       HttpResponse{200, {{"X-Archive-Orig-Last-Modified", "Tue, 05 Jan 2010 10:00:00 GMT"}}, ""});
  auto r = query_archives(kUri, ctx);
  ASSERT_EQ(r.status, Status::ok);
  EXPECT_EQ(r.estimate, at(2010, 1, 5, 10));
  EXPECT_EQ(r.detail["by_archive"]["z.example"], "2010-01-05T10:00:00");
  EXPECT_EQ(r.detail["by_archive"]["y.example"], "2010-04-02T00:00:00");
  EXPECT_FALSE(r.detail["by_archive"].contains("x.example"));
  // x.example's capture is implausible, so only y and z are probed.
  EXPECT_TRUE(r.confidence_flags.empty());
}

TEST(Archives, NotFoundAndMalformed) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.timemap_url(kUri), HttpResponse{404, {}, ""});
  EXPECT_EQ(query_archives(kUri, ctx).status, Status::empty);
  t.on("GET", kEndpoints.timemap_url(kUri), HttpResponse{200, {}, "<html>nope</html>"});
  EXPECT_EQ(query_archives(kUri, ctx).status, Status::error);
  t.on("GET", kEndpoints.timemap_url(kUri), HttpResponse{502, {}, ""});
  EXPECT_EQ(query_archives(kUri, ctx).status, Status::error);
}

TEST(Archives, FailedProbeFlagsPartialFetch) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.timemap_url(kUri),
       HttpResponse{200, {}, "<http://y.example/2/x>; rel=\"memento\"; datetime=\"Fri, 02 Apr 2010 00:00:00 GMT\""});
  auto r = query_archives(kUri, ctx);
  EXPECT_EQ(r.status, Status::ok);
  EXPECT_TRUE(r.confidence_flags.count(std::string(kFlagPartialFetch)));
}

TEST(Shortener, LookupThenInfo) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.shortener_lookup_url(kUri),
       ok_json(R"({"data":{"link_lookup":[{"url":"http://a.example/page","aggregate_link":"http://bit.ly/x"}]}})"));
  t.on("GET", kEndpoints.shortener_info_url("http://bit.ly/x"),
       ok_json(R"({"data":{"info":[{"created_at":1300963452}]}})"));
  auto r = query_shortener(kUri, ctx);
  ASSERT_EQ(r.status, Status::ok);
  EXPECT_EQ(r.estimate, at(2011, 3, 24, 10, 44, 12));

  t.on("GET", kEndpoints.shortener_lookup_url(kUri),
       ok_json(R"({"data":{"link_lookup":[{"url":"http://a.example/page","error":"NOT_FOUND"}]}})"));
  EXPECT_EQ(query_shortener(kUri, ctx).status, Status::empty);

  t.on("GET", kEndpoints.shortener_lookup_url(kUri), ok_json("{not json"));
  EXPECT_EQ(query_shortener(kUri, ctx).status, Status::error);
}

TEST(Social, EarliestPlausiblePostAndClippedWindow) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.social_url(kUri),
       ok_json(R"({"response":{"list":[{"date":1357000000},{"date":"1257800000"},{"date":0},{"date":4102444800}],"total":4}})"));
  auto r = query_social(kUri, ctx);
  ASSERT_EQ(r.status, Status::ok);
  EXPECT_EQ(r.estimate, from_unix_seconds(1257800000));
  EXPECT_TRUE(r.confidence_flags.empty());

  nlohmann::json page;
  for (std::size_t i = 0; i < kSocialPageLimit; ++i) page["response"]["list"].push_back({{"date", 1300000000 + i}});
  t.on("GET", kEndpoints.social_url(kUri), ok_json(page.dump()));
  r = query_social(kUri, ctx);
  EXPECT_EQ(r.estimate, from_unix_seconds(1300000000));
  EXPECT_TRUE(r.confidence_flags.count(std::string(kFlagClippedWindow)));
}

TEST(SearchIndex, DayGranularityOnlyForMatchingLink) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  t.on("GET", kEndpoints.search_index_url(kUri),
       ok_json(R"({"items":[{"link":"http://other.example/","crawl_date":"2001-01-01"},
                            {"link":"HTTP://A.EXAMPLE/page","crawl_date":"2009-11-16"}]})"));
  auto r = query_search_index(kUri, ctx);
  ASSERT_EQ(r.status, Status::ok);
  EXPECT_EQ(r.granularity, Granularity::day);
  EXPECT_EQ(r.estimate, at(2009, 11, 16));

  t.on("GET", kEndpoints.search_index_url(kUri), ok_json(R"({"searchInformation":{}})"));
  EXPECT_EQ(query_search_index(kUri, ctx).status, Status::empty);
}

TEST(Gather, IsolationAndOrder) {
  FakeTransport t;
  SourceContext ctx{t, kWindow, kEndpoints};
  auto registry = SourceRegistry::defaults();
  registry.set(Method::social, [](const CanonicalUri&, const SourceContext&) -> EvidenceResult {
    throw std::runtime_error("boom");
  });
  registry.set(Method::shortener, [](const CanonicalUri&, const SourceContext&) {
    return EvidenceResult::ok(Method::shortener, at(1800, 1, 1));  // implausible ok is demoted
  });
  registry.set(Method::last_modified, [](const CanonicalUri&, const SourceContext&) {
    return EvidenceResult::ok(Method::last_modified, at(2005, 5, 5));
  });
  std::set<Method> all(kAllMethods.begin(), kAllMethods.end());
  for (std::size_t p : {1u, 2u, 6u, 32u}) {
    auto results = gather_evidence(kUri, ctx, all, registry, p);
    ASSERT_EQ(results.size(), 6u);
    for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(results[i].method, kAllMethods[i]);
    EXPECT_EQ(results[2].status, Status::ok);
    EXPECT_EQ(results[4].status, Status::empty);
    EXPECT_FALSE(results[4].estimate);
    EXPECT_EQ(results[5].status, Status::error);
    EXPECT_EQ(results[5].message, "boom");
  }
  EXPECT_THROW(gather_evidence(kUri, ctx, {}, registry, 1), std::invalid_argument);
  auto one = gather_evidence(kUri, ctx, {Method::last_modified}, registry, 4);
  ASSERT_EQ(one.size(), 1u);
}

TEST(Gather, ReplayedFixtureMatchesRecordedSources) {
  auto cassette = std::make_shared<const Cassette>(Cassette::load(CARBONDATE_FIXTURES "/mementoweb.cassette.jsonl"));
  ReplayTransport t(cassette);
  SourceContext ctx{t, PlausibilityWindow::ending_at(cassette->recorded_at()), kEndpoints};
  auto uri = normalize_uri("http://www.mementoweb.org");
  std::set<Method> all(kAllMethods.begin(), kAllMethods.end());
  auto results = gather_evidence(uri, ctx, all, SourceRegistry::defaults(), 6);
  for (const auto& r : results) EXPECT_EQ(r.status, Status::ok) << method_name(r.method) << ": " << r.message;
  const auto& backlinks = results[1];
  EXPECT_EQ(backlinks.estimate, at(2011, 1, 16, 21, 42, 12));
  EXPECT_EQ(backlinks.detail["backlinks"], 2);
  EXPECT_TRUE(backlinks.confidence_flags.empty());
  // Two linking pages of 8 and 5 captures: at most 4 + 3 fetches.
  EXPECT_LE(backlinks.detail["fetches"].get<int>(), 7);
}

}  // namespace carbondate
