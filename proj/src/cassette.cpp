#include "carbondate/cassette.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "carbondate/error.hpp"
#include "carbondate/uri.hpp"

namespace carbondate {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string upper(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  return out;
}

ordered_json headers_to_json(const Headers& headers) {
  ordered_json arr = ordered_json::array();
  for (const auto& [k, v] : headers) arr.push_back({k, v});
  return arr;
}

Headers headers_from_json(const json& j) {
  Headers out;
  if (j.is_array()) {
    for (const auto& pair : j) out.emplace_back(pair.at(0).get<std::string>(), pair.at(1).get<std::string>());
  } else if (j.is_object()) {
    for (const auto& [k, v] : j.items()) out.emplace_back(k, v.get<std::string>());
  }
  return out;
}

ordered_json interaction_to_json(const Interaction& it) {
  ordered_json req;
  req["method"] = it.request.method;
  req["url"] = it.request.url;
  ordered_json req_headers = ordered_json::object();
  for (const auto& [k, v] : it.request.headers) req_headers[k] = v;
  req["headers"] = req_headers;

  ordered_json j;
  j["request"] = req;
  if (it.response) {
    ordered_json resp;
    resp["status"] = it.response->status;
    resp["headers"] = headers_to_json(it.response->headers);
    resp["body"] = it.response->body;
    j["response"] = resp;
  }
  if (it.error) j["error"] = *it.error;
  return j;
}

Interaction interaction_from_json(const json& j) {
  Interaction it;
  const auto& req = j.at("request");
  it.request.method = upper(req.at("method").get<std::string>());
  it.request.url = req.at("url").get<std::string>();
  if (auto h = req.find("headers"); h != req.end()) it.request.headers = headers_from_json(*h);
  if (auto r = j.find("response"); r != j.end() && !r->is_null()) {
    HttpResponse resp;
    resp.status = r->at("status").get<int>();
    if (resp.status < 100 || resp.status > 599)
      throw FormatError("status code " + std::to_string(resp.status) + " outside [100, 599]");
    if (auto h = r->find("headers"); h != r->end()) resp.headers = headers_from_json(*h);
    resp.body = r->value("body", "");
    it.response = std::move(resp);
  }
  if (auto e = j.find("error"); e != j.end() && e->is_string()) it.error = e->get<std::string>();
  if (!it.response && !it.error) throw FormatError("interaction has neither response nor error");
  return it;
}

}  // namespace

std::string interaction_key(const HttpRequest& request) {
  std::string url = request.url;
  if (auto u = try_normalize_uri(url)) url = u->str();
  return upper(request.method) + " " + url;
}

const std::vector<std::string>& default_volatile_headers() {
  static const std::vector<std::string> kHeaders = {"date", "user-agent", "x-request-id", "x-amzn-trace-id",
                                                    "cookie", "authorization", "if-none-match",
                                                    "if-modified-since"};
  return kHeaders;
}

Cassette::Cassette(UtcTimestamp recorded_at) : recorded_at_(recorded_at) {}

bool Cassette::is_volatile(std::string_view header) const {
  std::string name = lower(header);
  return std::find(volatile_headers_.begin(), volatile_headers_.end(), name) != volatile_headers_.end();
}

bool Cassette::add(Interaction interaction) {
  auto key = interaction_key(interaction.request);
  if (index_.count(key)) return false;
  index_.emplace(std::move(key), entries_.size());
  entries_.push_back(std::move(interaction));
  return true;
}

const Interaction* Cassette::find(const HttpRequest& request) const {
  auto it = index_.find(interaction_key(request));
  if (it == index_.end()) return nullptr;
  const Interaction& recorded = entries_[it->second];
  for (const auto& [name, value] : recorded.request.headers) {
    if (is_volatile(name)) continue;
    auto actual = header_value(request.headers, name);
    if (!actual || *actual != value) return nullptr;
  }
  return &recorded;
}

Cassette Cassette::read(std::istream& in) {
  Cassette c;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      if (!have_header) {
        int version = j.at("version").get<int>();
        if (version != kVersion) throw FormatError("unsupported cassette version " + std::to_string(version));
        c.recorded_at_ = parse_iso_timestamp(j.at("recorded_at").get<std::string>());
        if (auto v = j.find("volatile_headers"); v != j.end()) {
          c.volatile_headers_.clear();
          for (const auto& h : *v) c.volatile_headers_.push_back(lower(h.get<std::string>()));
        }
        have_header = true;
        continue;
      }
      auto it = interaction_from_json(j);
      auto key = interaction_key(it.request);
      if (!c.add(std::move(it))) throw FormatError("duplicate interaction " + key);
    } catch (const json::exception& e) {
      throw FormatError("cassette line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw FormatError("cassette line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw FormatError("cassette has no header line");
  return c;
}

Cassette Cassette::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open cassette " + path.string());
  return read(in);
}

void Cassette::write(std::ostream& out) const {
  ordered_json header;
  header["version"] = kVersion;
  header["recorded_at"] = format_iso_timestamp(recorded_at_) + "Z";
  header["volatile_headers"] = volatile_headers_;
  out << header.dump() << '\n';
  for (const auto& e : entries_) out << interaction_to_json(e).dump() << '\n';
}

void Cassette::save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw FormatError("cannot write cassette " + path.string());
  write(out);
}

HttpResponse replay_lookup(const Cassette& cassette, const HttpRequest& request) {
  const Interaction* hit = cassette.find(request);
  if (!hit) throw UnmatchedInteraction(interaction_key(request));
  if (hit->error) throw TransportError(*hit->error);
  return *hit->response;
}

HttpResponse ReplayTransport::send(const HttpRequest& request) { return replay_lookup(*cassette_, request); }

HttpResponse RecordingTransport::send(const HttpRequest& request) {
  {
    std::lock_guard lock(mutex_);
    if (sink_->find(request)) return replay_lookup(*sink_, request);
  }
  Interaction it{request, std::nullopt, std::nullopt};
  try {
    it.response = live_->send(request);
  } catch (const std::exception& e) {
    it.error = e.what();
  }
  {
    std::lock_guard lock(mutex_);
    sink_->add(it);
  }
  if (it.error) throw TransportError(*it.error);
  return *it.response;
}

Cassette RecordingTransport::snapshot() const {
  std::lock_guard lock(mutex_);
  return *sink_;
}

std::shared_ptr<RecordingTransport> record_passthrough(std::shared_ptr<Transport> live,
                                                       std::shared_ptr<Cassette> sink) {
  return std::make_shared<RecordingTransport>(std::move(live), std::move(sink));
}

}  // namespace carbondate
