#include "medcot/mock_server.hpp"

#include <cmath>
#include <numbers>

#include "httplib.h"
#include "io_util.hpp"
#include "medcot/encoding.hpp"
#include "medcot/error.hpp"
#include "medcot/teacher.hpp"
#include "json.hpp"

namespace medcot {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

std::map<std::string, Label> parse_gold_object(const json& obj) {
  std::map<std::string, Label> out;
  for (const auto& [key, value] : obj.items()) {
    auto label = parse_label(value.get<std::string>());
    if (!label) throw Error(ErrorCode::ConfigError, "gold label for " + key + " is not A-D");
    out.emplace(key, *label);
  }
  return out;
}

MockModelProfile parse_profile(const json& j, const std::filesystem::path& base_dir) {
  MockModelProfile p;
  if (j.contains("bias")) {
    for (Label l : kLabels) p.bias[index_of(l)] = j["bias"].value(std::string(1, to_char(l)), 0.0);
  }
  p.competence = j.value("competence", 0.0);
  p.visual_reliance = j.value("visual_reliance", 0.0);
  p.noise_scale = j.value("noise_scale", 0.0);
  p.seed = j.value("seed", std::uint64_t{0});
  p.generate_word_count = j.value("generate_word_count", std::size_t{40});
  p.generate_fail_rate = j.value("generate_fail_rate", 0.0);
  if (j.contains("generate_fail_keys")) {
    for (const auto& k : j["generate_fail_keys"]) p.generate_fail_keys.insert(k.get<std::string>());
  }
  if (j.contains("gold_lookup")) p.gold_lookup = parse_gold_object(j["gold_lookup"]);
  if (j.contains("gold_fixture")) {
    std::filesystem::path fixture = j["gold_fixture"].get<std::string>();
    if (fixture.is_relative()) fixture = base_dir / fixture;
    for (auto& [k, v] : parse_gold_object(json::parse(detail::read_file(fixture)))) p.gold_lookup.emplace(k, v);
  }
  if (p.competence < 0 || p.noise_scale < 0) throw Error(ErrorCode::ConfigError, "competence and noise_scale must be >= 0");
  if (p.visual_reliance < 0 || p.visual_reliance > 1) throw Error(ErrorCode::ConfigError, "visual_reliance must be in [0, 1]");
  if (p.generate_fail_rate < 0 || p.generate_fail_rate > 1) {
    throw Error(ErrorCode::ConfigError, "generate_fail_rate must be in [0, 1]");
  }
  return p;
}

double standard_normal(std::uint64_t seed) {
  SplitMix64 rng(seed);
  double u1 = rng.next_unit();
  const double u2 = rng.next_unit();
  if (u1 <= 0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::optional<Label> candidate_label(std::string_view candidate) {
  const auto b = candidate.find_first_not_of(' ');
  if (b == std::string_view::npos) return std::nullopt;
  return parse_label(candidate.substr(b));
}

}  // namespace

MockModelProfile MockModelProfile::from_json(std::string_view text) {
  try {
    return parse_profile(json::parse(text), std::filesystem::current_path());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, std::string("mock profile: ") + e.what());
  }
}

MockModelProfile MockModelProfile::from_json_file(const std::filesystem::path& path) {
  try {
    return parse_profile(json::parse(detail::read_file(path)), path.parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigError, path.string() + ": " + e.what());
  }
}

std::string MockModelProfile::to_json() const {
  ordered_json j;
  for (Label l : kLabels) j["bias"][std::string(1, to_char(l))] = bias[index_of(l)];
  j["competence"] = competence;
  j["visual_reliance"] = visual_reliance;
  j["noise_scale"] = noise_scale;
  j["seed"] = seed;
  j["generate_word_count"] = generate_word_count;
  j["generate_fail_rate"] = generate_fail_rate;
  j["generate_fail_keys"] = generate_fail_keys;
  ordered_json gold = ordered_json::object();
  for (const auto& [k, v] : gold_lookup) gold[k] = std::string(1, to_char(v));
  j["gold_lookup"] = std::move(gold);
  return j.dump(2) + "\n";
}

std::string user_key(std::string_view user) { return hex64(fnv1a64(user)); }

std::map<std::string, Label> build_gold_fixture(std::span<const VqaRecord> records,
                                                std::span<const PromptFamily> families, bool include_teacher) {
  std::map<std::string, Label> out;
  for (const auto& r : records) {
    for (auto family : families) {
      if (family == PromptFamily::CaptionAware && !r.has_caption()) continue;
      out[user_key(render_user(r, family))] = r.answer;
    }
    if (include_teacher) out[user_key(render_teacher_user(r))] = r.answer;
  }
  return out;
}

std::vector<double> mock_logits(const MockModelProfile& profile, std::string_view system, std::string_view user,
                                bool has_image, std::span<const std::string> candidates, Label gold) {
  const double effective =
      profile.competence * (1.0 - profile.visual_reliance * (has_image ? 0.0 : 1.0));
  std::uint64_t content = fnv1a64(system);
  content = fnv1a64("\x1f", content);
  content = fnv1a64(user, content);
  content = fnv1a64(has_image ? "\x1fimage" : "\x1fnone", content);

  std::vector<double> out;
  out.reserve(candidates.size());
  for (const auto& candidate : candidates) {
    const auto label = candidate_label(candidate);
    if (!label) throw Error(ErrorCode::ParseError, "candidate \"" + candidate + "\" is not a label");
    double score = profile.bias[index_of(*label)] + (*label == gold ? effective : 0.0);
    if (profile.noise_scale > 0) {
      score += profile.noise_scale *
               standard_normal(derive_seed(profile.seed, fnv1a64(std::string(1, to_char(*label)), content)));
    }
    if (!candidate.empty() && candidate.front() == ' ') score -= kSpacedVariantOffset;
    out.push_back(score);
  }
  return out;
}

bool mock_generate_fails(const MockModelProfile& profile, std::string_view user) {
  if (profile.generate_fail_keys.contains(user_key(user))) return true;
  if (profile.generate_fail_rate <= 0) return false;
  SplitMix64 rng(derive_seed(profile.seed ^ 0x67656e6572617465ULL, fnv1a64(user)));
  return rng.next_unit() < profile.generate_fail_rate;
}

std::string mock_generate_text(const MockModelProfile& profile, std::string_view user, Label gold) {
  static constexpr std::array<std::string_view, 12> kWords = {
      "the", "image", "shows", "a", "region", "with", "features", "that", "support", "this", "finding", "clearly"};
  std::string text = "Explanation:";
  for (std::size_t i = 0; i < profile.generate_word_count; ++i) {
    text += ' ';
    text += kWords[i % kWords.size()];
  }
  const Label answer = mock_generate_fails(profile, user) ? static_cast<Label>((index_of(gold) + 1) % 4) : gold;
  text += "\nAnswer: ";
  text += to_char(answer);
  return text;
}

double mock_expected_accuracy(const MockModelProfile& profile, const std::array<std::size_t, 4>& gold_counts,
                              bool image_present) {
  const double effective = profile.competence * (1.0 - profile.visual_reliance * (image_present ? 0.0 : 1.0));
  std::size_t correct = 0;
  std::size_t total = 0;
  for (Label gold : kLabels) {
    std::size_t best = 0;
    std::array<double, 4> scores{};
    for (Label l : kLabels) scores[index_of(l)] = profile.bias[index_of(l)] + (l == gold ? effective : 0.0);
    for (std::size_t i = 1; i < 4; ++i) {
      if (scores[i] > scores[best]) best = i;
    }
    total += gold_counts[index_of(gold)];
    if (best == index_of(gold)) correct += gold_counts[index_of(gold)];
  }
  if (total == 0) throw Error(ErrorCode::EmptyResults, "no gold counts");
  return 100.0 * static_cast<double>(correct) / static_cast<double>(total);
}

struct MockServer::Impl {
  httplib::Server server;
};

namespace {

void reply_error(httplib::Response& res, int status, const std::string& message) {
  ordered_json j;
  j["error"] = message;
  res.status = status;
  res.set_content(j.dump(), "application/json");
}

bool is_string_field(const json& j, const char* key) { return j.contains(key) && j[key].is_string(); }

}  // namespace

MockServer::MockServer(MockModelProfile profile) : profile_(std::move(profile)), impl_(std::make_unique<Impl>()) {
  auto& server = impl_->server;

  server.Post("/v1/score", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    json j;
    try {
      j = json::parse(req.body);
    } catch (const json::exception&) {
      return reply_error(res, 400, "body is not JSON");
    }
    if (!j.is_object() || !is_string_field(j, "request_id") || !is_string_field(j, "system") ||
        !is_string_field(j, "user") || !j.contains("image") || !(j["image"].is_null() || j["image"].is_string()) ||
        !j.contains("candidates") || !j["candidates"].is_array()) {
      return reply_error(res, 400, "expected request_id, system, user, image, candidates");
    }
    std::vector<std::string> candidates;
    for (const auto& c : j["candidates"]) {
      if (!c.is_string() || !candidate_label(c.get<std::string>())) return reply_error(res, 400, "bad candidate");
      candidates.push_back(c.get<std::string>());
    }
    const auto user = j["user"].get<std::string>();
    auto gold = profile_.gold_lookup.find(user_key(user));
    if (gold == profile_.gold_lookup.end()) return reply_error(res, 422, "no gold label for request");

    ordered_json out;
    out["request_id"] = j["request_id"];
    out["logits"] = mock_logits(profile_, j["system"].get<std::string>(), user, j["image"].is_string(),
                                candidates, gold->second);
    res.set_content(out.dump(), "application/json");
  });

  server.Post("/v1/generate", [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    json j;
    try {
      j = json::parse(req.body);
    } catch (const json::exception&) {
      return reply_error(res, 400, "body is not JSON");
    }
    if (!j.is_object() || !is_string_field(j, "request_id") || !is_string_field(j, "system") ||
        !is_string_field(j, "user") || !j.contains("image") || !(j["image"].is_null() || j["image"].is_string()) ||
        !j.contains("max_tokens") || !j["max_tokens"].is_number_integer() || !j.contains("temperature") ||
        !j["temperature"].is_number()) {
      return reply_error(res, 400, "expected request_id, system, user, image, max_tokens, temperature");
    }
    const auto user = j["user"].get<std::string>();
    auto gold = profile_.gold_lookup.find(user_key(user));
    if (gold == profile_.gold_lookup.end()) return reply_error(res, 422, "no gold label for request");
    ordered_json out;
    out["request_id"] = j["request_id"];
    out["text"] = mock_generate_text(profile_, user, gold->second);
    res.set_content(out.dump(), "application/json");
  });
}

MockServer::~MockServer() { stop(); }

int MockServer::start(const std::string& host, int port) {
  host_ = host;
  auto& server = impl_->server;
  port_ = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (port_ < 0) throw Error(ErrorCode::ConfigError, "cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([&server] { server.listen_after_bind(); });
  server.wait_until_ready();
  return port_;
}

void MockServer::run(const std::string& host, int port) {
  host_ = host;
  port_ = port;
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::ConfigError, "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void MockServer::stop() {
  if (impl_) impl_->server.stop();
  if (thread_.joinable()) thread_.join();
}

std::string MockServer::url() const { return "http://" + host_ + ":" + std::to_string(port_); }

}  // namespace medcot
