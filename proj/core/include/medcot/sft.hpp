#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "medcot/annotation.hpp"
#include "medcot/dataset.hpp"
#include "medcot/prompts.hpp"

namespace medcot {

enum class SftKind { AnswerOnlyNoCaption, AnswerOnlyCaption, CotNoCaption };

std::string_view to_string(SftKind kind) noexcept;
std::optional<SftKind> parse_sft_kind(std::string_view text) noexcept;
PromptFamily family_for(SftKind kind) noexcept;

struct SftSample {
  std::string record_id;
  std::optional<std::string> image_ref;
  std::string system;
  std::string user;
  std::string assistant;

  friend bool operator==(const SftSample&, const SftSample&) = default;
};

/// annotation is required (and must be a success) for CotNoCaption only.
SftSample build_sft_sample(const VqaRecord& record, SftKind kind,
                           const CotAnnotation* annotation = nullptr);

std::string sft_sample_to_jsonl_line(const SftSample& sample);
SftSample sft_sample_from_json(std::string_view line);

struct SftEmitOptions {
  SftKind kind = SftKind::CotNoCaption;
  std::filesystem::path out_dir;
  /// Largest tolerated fraction of records skipped for lack of a successful
  /// annotation.
  double max_skip_fraction = 0.001;
};

struct SftEmitSummary {
  std::vector<std::filesystem::path> files;
  std::vector<std::size_t> samples_per_chunk;
  std::vector<std::string> skipped_ids;
};

/// Writes one chunk_NNN.jsonl per manifest into out_dir. Throws before
/// writing anything: MissingAnnotationsAboveThreshold if too many records
/// lack annotations, MissingCaption for a caption kind, TestSplitLeak for a
/// test-split record.
SftEmitSummary emit_sft_chunks(std::span<const VqaRecord> records,
                               std::span<const CotAnnotation> annotations,
                               std::span<const ChunkManifest> manifests,
                               const SftEmitOptions& options);

/// LoRA fine-tuning hyperparameters handed to the training driver.
struct TrainConfig {
  int lora_rank = 32;
  int lora_alpha = 64;
  double lora_dropout = 0.05;
  std::array<std::string, 4> target_projections = {"q_proj", "k_proj", "v_proj", "o_proj"};
  bool vision_encoder_frozen = true;
  double learning_rate = 2e-4;
  int warmup_steps = 100;
  std::string lr_schedule = "linear";
  int per_device_batch = 1;
  int grad_accum = 4;
  int effective_batch = 8;
  double grad_clip_norm = 1.0;
  int epochs_per_chunk = 1;
  std::string optimizer = "adamw";
  int n_chunks = 51;
  bool carry_forward_adapter = true;

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

std::string train_config_to_json(const TrainConfig& config);
TrainConfig train_config_from_json(std::string_view text);
void emit_train_config(const std::filesystem::path& path, const TrainConfig& config = {});

}  // namespace medcot
