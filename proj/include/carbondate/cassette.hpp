#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "carbondate/http.hpp"
#include "carbondate/time.hpp"

namespace carbondate {

/// A recorded request and its outcome: either a response or the error the
/// transport raised.
struct Interaction {
  HttpRequest request;
  std::optional<HttpResponse> response;
  std::optional<std::string> error;
};

/// "METHOD normalized-url", the identity of an interaction within a cassette.
std::string interaction_key(const HttpRequest& request);

/// Default headers excluded from matching (lowercase).
const std::vector<std::string>& default_volatile_headers();

/// Recorded upstream interactions, stored as JSON lines: one header line
///   {"version":1,"recorded_at":"...Z","volatile_headers":[...]}
/// followed by one Interaction per line.
class Cassette {
 public:
  static constexpr int kVersion = 1;

  Cassette() = default;
  explicit Cassette(UtcTimestamp recorded_at);

  /// Throws FormatError with the offending line number.
  static Cassette read(std::istream& in);
  static Cassette load(const std::filesystem::path& path);

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  /// Returns false, keeping the existing entry, when the key is already present.
  bool add(Interaction interaction);

  /// Entry whose key matches and whose recorded non-volatile request headers
  /// all appear in `request` with the same values.
  const Interaction* find(const HttpRequest& request) const;

  const std::vector<Interaction>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  UtcTimestamp recorded_at() const noexcept { return recorded_at_; }
  const std::vector<std::string>& volatile_headers() const noexcept { return volatile_headers_; }

 private:
  bool is_volatile(std::string_view header) const;

  UtcTimestamp recorded_at_{};
  std::vector<std::string> volatile_headers_ = default_volatile_headers();
  std::vector<Interaction> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Returns the recorded response for `request`, rethrows a recorded error as
/// TransportError, or throws UnmatchedInteraction.
HttpResponse replay_lookup(const Cassette& cassette, const HttpRequest& request);

/// Read-only replay; safe for concurrent use.
class ReplayTransport : public Transport {
 public:
  explicit ReplayTransport(std::shared_ptr<const Cassette> cassette) : cassette_(std::move(cassette)) {}

  HttpResponse send(const HttpRequest& request) override;
  const Cassette& cassette() const { return *cassette_; }

 private:
  std::shared_ptr<const Cassette> cassette_;
};

/// Forwards to a live transport and appends every new interaction, errors
/// included, to the sink. Requests already in the sink are answered from it.
class RecordingTransport : public Transport {
 public:
  RecordingTransport(std::shared_ptr<Transport> live, std::shared_ptr<Cassette> sink)
      : live_(std::move(live)), sink_(std::move(sink)) {}

  HttpResponse send(const HttpRequest& request) override;

  /// Snapshot of the sink, taken under the recording lock.
  Cassette snapshot() const;

 private:
  std::shared_ptr<Transport> live_;
  std::shared_ptr<Cassette> sink_;
  mutable std::mutex mutex_;
};

std::shared_ptr<RecordingTransport> record_passthrough(std::shared_ptr<Transport> live,
                                                       std::shared_ptr<Cassette> sink);

}  // namespace carbondate
