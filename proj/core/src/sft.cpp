#include "medcot/sft.hpp"

#include <unordered_map>

#include "io_util.hpp"
#include "medcot/error.hpp"
#include "json.hpp"

namespace medcot {

using ordered_json = nlohmann::ordered_json;

std::string_view to_string(SftKind kind) noexcept {
  switch (kind) {
    case SftKind::AnswerOnlyNoCaption: return "answer_only_nocaption";
    case SftKind::AnswerOnlyCaption: return "answer_only_caption";
    case SftKind::CotNoCaption: return "cot_nocaption";
  }
  return "cot_nocaption";
}

std::optional<SftKind> parse_sft_kind(std::string_view text) noexcept {
  for (auto k : {SftKind::AnswerOnlyNoCaption, SftKind::AnswerOnlyCaption, SftKind::CotNoCaption}) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

PromptFamily family_for(SftKind kind) noexcept {
  switch (kind) {
    case SftKind::AnswerOnlyNoCaption: return PromptFamily::NoCaption;
    case SftKind::AnswerOnlyCaption: return PromptFamily::CaptionAware;
    case SftKind::CotNoCaption: return PromptFamily::CotTraining;
  }
  return PromptFamily::NoCaption;
}

SftSample build_sft_sample(const VqaRecord& record, SftKind kind, const CotAnnotation* annotation) {
  const auto family = family_for(kind);
  SftSample s;
  s.record_id = record.id;
  s.image_ref = record.image_ref;
  s.system = std::string(render_system(family));
  s.user = render_user(record, family);
  if (kind == SftKind::CotNoCaption) {
    if (annotation == nullptr || !annotation->ok()) {
      throw Error(ErrorCode::AnnotationMismatch, record.id + ": no successful annotation");
    }
    s.assistant = render_training_target(record, *annotation).text;
  } else {
    s.assistant = std::string(1, to_char(record.answer));
  }
  return s;
}

std::string sft_sample_to_jsonl_line(const SftSample& s) {
  ordered_json j;
  j["record_id"] = s.record_id;
  j["image_ref"] = s.image_ref ? ordered_json(*s.image_ref) : ordered_json(nullptr);
  ordered_json messages = ordered_json::array();
  messages.push_back({{"role", "system"}, {"content", s.system}});
  messages.push_back({{"role", "user"}, {"content", s.user}});
  messages.push_back({{"role", "assistant"}, {"content", s.assistant}});
  j["messages"] = std::move(messages);
  return j.dump();
}

SftSample sft_sample_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    SftSample s;
    s.record_id = j.at("record_id").get<std::string>();
    if (!j.at("image_ref").is_null()) s.image_ref = j.at("image_ref").get<std::string>();
    const auto& m = j.at("messages");
    if (m.size() != 3 || m[0].at("role") != "system" || m[1].at("role") != "user" ||
        m[2].at("role") != "assistant") {
      throw Error(ErrorCode::ParseError, s.record_id + ": messages must be system, user, assistant");
    }
    s.system = m[0].at("content").get<std::string>();
    s.user = m[1].at("content").get<std::string>();
    s.assistant = m[2].at("content").get<std::string>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("sft sample: ") + e.what());
  }
}

SftEmitSummary emit_sft_chunks(std::span<const VqaRecord> records,
                               std::span<const CotAnnotation> annotations,
                               std::span<const ChunkManifest> manifests,
                               const SftEmitOptions& options) {
  std::unordered_map<std::string_view, const VqaRecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  std::unordered_map<std::string_view, const CotAnnotation*> annotation_by_id;
  for (const auto& a : annotations) {
    if (a.ok()) annotation_by_id[a.record_id] = &a;
  }

  SftEmitSummary summary;
  std::size_t total = 0;
  // Validate everything first so a failing run leaves no partial output.
  for (const auto& m : manifests) {
    for (const auto& id : m.record_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) throw Error(ErrorCode::ConfigError, "manifest id " + id + " not in dataset");
      ++total;
      const auto& record = *it->second;
      if (record.split != Split::Train) throw Error(ErrorCode::TestSplitLeak, record.id);
      if (options.kind == SftKind::AnswerOnlyCaption && !record.has_caption()) {
        throw Error(ErrorCode::MissingCaption, record.id);
      }
      if (options.kind == SftKind::CotNoCaption && !annotation_by_id.contains(record.id)) {
        summary.skipped_ids.push_back(record.id);
      }
    }
  }
  if (total > 0) {
    const double skipped = static_cast<double>(summary.skipped_ids.size()) / static_cast<double>(total);
    if (skipped > options.max_skip_fraction) {
      throw Error(ErrorCode::MissingAnnotationsAboveThreshold,
                  std::to_string(summary.skipped_ids.size()) + " of " + std::to_string(total) +
                      " records lack a successful annotation");
    }
  }

  for (const auto& m : manifests) {
    std::string content;
    std::size_t n = 0;
    for (const auto& id : m.record_ids) {
      const auto& record = *by_id.at(id);
      const CotAnnotation* annotation = nullptr;
      if (options.kind == SftKind::CotNoCaption) {
        auto it = annotation_by_id.find(record.id);
        if (it == annotation_by_id.end()) continue;
        annotation = it->second;
      }
      content += sft_sample_to_jsonl_line(build_sft_sample(record, options.kind, annotation));
      content += '\n';
      ++n;
    }
    auto path = options.out_dir / chunk_file_name(m.chunk_index);
    detail::write_file(path, content);
    summary.files.push_back(std::move(path));
    summary.samples_per_chunk.push_back(n);
  }
  return summary;
}

std::string train_config_to_json(const TrainConfig& c) {
  ordered_json j;
  j["lora_rank"] = c.lora_rank;
  j["lora_alpha"] = c.lora_alpha;
  j["lora_dropout"] = c.lora_dropout;
  j["target_projections"] = c.target_projections;
  j["vision_encoder_frozen"] = c.vision_encoder_frozen;
  j["learning_rate"] = c.learning_rate;
  j["warmup_steps"] = c.warmup_steps;
  j["lr_schedule"] = c.lr_schedule;
  j["per_device_batch"] = c.per_device_batch;
  j["grad_accum"] = c.grad_accum;
  j["effective_batch"] = c.effective_batch;
  j["grad_clip_norm"] = c.grad_clip_norm;
  j["epochs_per_chunk"] = c.epochs_per_chunk;
  j["optimizer"] = c.optimizer;
  j["n_chunks"] = c.n_chunks;
  j["carry_forward_adapter"] = c.carry_forward_adapter;
  return j.dump(2) + "\n";
}

TrainConfig train_config_from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TrainConfig c;
    c.lora_rank = j.at("lora_rank").get<int>();
    c.lora_alpha = j.at("lora_alpha").get<int>();
    c.lora_dropout = j.at("lora_dropout").get<double>();
    const auto projections = j.at("target_projections").get<std::vector<std::string>>();
    if (projections.size() != c.target_projections.size()) {
      throw Error(ErrorCode::ParseError, "train config: expected four target projections");
    }
    std::copy(projections.begin(), projections.end(), c.target_projections.begin());
    c.vision_encoder_frozen = j.at("vision_encoder_frozen").get<bool>();
    c.learning_rate = j.at("learning_rate").get<double>();
    c.warmup_steps = j.at("warmup_steps").get<int>();
    c.lr_schedule = j.at("lr_schedule").get<std::string>();
    c.per_device_batch = j.at("per_device_batch").get<int>();
    c.grad_accum = j.at("grad_accum").get<int>();
    c.effective_batch = j.at("effective_batch").get<int>();
    c.grad_clip_norm = j.at("grad_clip_norm").get<double>();
    c.epochs_per_chunk = j.at("epochs_per_chunk").get<int>();
    c.optimizer = j.at("optimizer").get<std::string>();
    c.n_chunks = j.at("n_chunks").get<int>();
    c.carry_forward_adapter = j.at("carry_forward_adapter").get<bool>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("train config: ") + e.what());
  }
}

void emit_train_config(const std::filesystem::path& path, const TrainConfig& config) {
  detail::write_file(path, train_config_to_json(config));
}

}  // namespace medcot
