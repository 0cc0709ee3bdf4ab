#include "medcot/teacher.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <mutex>
#include <numeric>
#include <thread>
#include <unordered_map>

#include "io_util.hpp"
#include "medcot/encoding.hpp"
#include "medcot/error.hpp"
#include "medcot/prompts.hpp"
#include "json.hpp"

namespace medcot {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<Label> parse_answer_line(std::string_view line) {
  line = trim(line);
  if (!line.starts_with("Answer:")) return std::nullopt;
  auto rest = trim(line.substr(7));
  if (!rest.empty() && rest.back() == '.') rest.remove_suffix(1);
  return parse_label(rest);
}

struct Completion {
  std::size_t index;
  CotAnnotation annotation;
  std::optional<RecordFailure> failure;
};

}  // namespace

std::string render_teacher_user(const VqaRecord& record) {
  const char gold = to_char(record.answer);
  std::string out = render_user(record, PromptFamily::NoCaption);
  out += "\nThe correct answer is ";
  out += gold;
  out += ". Explain the image findings that support this answer, then output on a new line exactly: Answer: ";
  out += gold;
  out += '.';
  return out;
}

ParsedTeacherText parse_teacher_text(std::string_view text) {
  ParsedTeacherText out;
  auto body = trim(text);
  const auto last_nl = body.find_last_of('\n');
  const auto last_line = last_nl == std::string_view::npos ? body : body.substr(last_nl + 1);
  if (auto answer = parse_answer_line(last_line)) {
    out.answer = answer;
    body = last_nl == std::string_view::npos ? std::string_view{} : trim(body.substr(0, last_nl));
  }
  if (body.starts_with("Explanation:")) body = trim(body.substr(12));
  out.explanation = std::string(body);
  return out;
}

std::vector<CotAnnotation> load_annotations(const std::filesystem::path& path) {
  std::vector<CotAnnotation> out;
  const auto text = detail::read_file(path);
  for (auto line : detail::nonempty_lines(text)) out.push_back(annotation_from_json(line));
  return out;
}

void save_annotations(const std::filesystem::path& path, std::span<const CotAnnotation> annotations) {
  std::string out;
  for (const auto& a : annotations) {
    out += annotation_to_jsonl_line(a);
    out += '\n';
  }
  detail::write_file(path, out);
}

GenerationResult generate_explanations(std::span<const VqaRecord> records, const TeacherOptions& options) {
  for (const auto& r : records) {
    if (r.split != Split::Train) {
      throw Error(ErrorCode::TestSplitLeak, "record " + r.id + " is not from the training split");
    }
  }
  if (options.concurrency == 0) throw Error(ErrorCode::ConfigError, "concurrency must be positive");
  if (options.max_answer_attempts < 1) throw Error(ErrorCode::ConfigError, "max_answer_attempts must be >= 1");

  GenerationResult result;
  result.annotations.resize(records.size());

  std::unordered_map<std::string, CotAnnotation> previous;
  const bool checkpointing = !options.checkpoint.empty();
  if (checkpointing && std::filesystem::exists(options.checkpoint)) {
    for (auto& a : load_annotations(options.checkpoint)) previous[a.record_id] = std::move(a);
  }

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto it = previous.find(records[i].id);
    if (it != previous.end() && it->second.ok()) {
      result.annotations[i] = it->second;
      ++result.resumed;
    } else {
      pending.push_back(i);
    }
  }

  std::mutex mu;
  std::condition_variable cv;
  std::deque<Completion> completed;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> requests{0};

  auto annotate = [&](std::size_t index) -> Completion {
    const auto& record = records[index];
    Completion out{index, {}, std::nullopt};
    out.annotation.record_id = record.id;
    out.annotation.teacher_id = options.teacher_id;
    out.annotation.status = AnnotationStatus::Failed;

    auto fail = [&](ErrorCode code, std::string reason, std::string message) {
      out.annotation.failure_reason = std::move(reason);
      out.failure = RecordFailure{record.id, code, std::move(message)};
    };

    try {
      std::optional<std::string> image;
      if (options.images) image = options.images(record);
      nlohmann::ordered_json req;
      req["request_id"] = record.id;
      req["system"] = std::string(render_system(PromptFamily::CotTraining));
      req["user"] = render_teacher_user(record);
      req["image"] = nullptr;
      if (image) req["image"] = base64_encode(*image);
      req["max_tokens"] = options.max_tokens;
      req["temperature"] = options.temperature;
      const auto body = req.dump();

      std::string last_problem;
      for (int attempt = 0; attempt < options.max_answer_attempts; ++attempt) {
        const auto key = record.id + "#" + std::to_string(attempt);
        ++requests;
        const auto response =
            post_json(options.endpoint, "/v1/generate", body, options.retry, key, options.api_key);
        nlohmann::json j;
        try {
          j = nlohmann::json::parse(response);
        } catch (const nlohmann::json::exception& e) {
          throw Error(ErrorCode::MalformedResponse, record.id + ": " + e.what());
        }
        if (!j.is_object() || !j.contains("text") || !j["text"].is_string() ||
            j.value("request_id", std::string{}) != record.id) {
          throw Error(ErrorCode::MalformedResponse, record.id + ": bad generate response");
        }
        auto parsed = parse_teacher_text(j["text"].get<std::string>());
        if (parsed.answer != record.answer) {
          last_problem = parsed.answer ? std::string("answered ") + to_char(*parsed.answer)
                                       : std::string("no trailing answer line");
          continue;
        }
        if (parsed.explanation.empty()) {
          last_problem = "empty explanation";
          continue;
        }
        out.annotation.word_count = count_words(parsed.explanation);
        out.annotation.explanation = std::move(parsed.explanation);
        out.annotation.status = AnnotationStatus::Success;
        return out;
      }
      fail(ErrorCode::AnswerMismatch, "AnswerMismatch",
           record.id + ": " + last_problem + " after " + std::to_string(options.max_answer_attempts) +
               " attempts (gold " + to_char(record.answer) + ")");
    } catch (const Error& e) {
      fail(e.code(), std::string(to_string(e.code())), e.what());
    }
    return out;
  };

  auto worker = [&] {
    for (;;) {
      const auto k = next.fetch_add(1);
      if (k >= pending.size()) return;
      auto outcome = annotate(pending[k]);
      {
        std::lock_guard lock(mu);
        completed.push_back(std::move(outcome));
      }
      cv.notify_one();
    }
  };

  const auto n_threads = std::min(options.concurrency, pending.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);

  // Single writer: the checkpoint is appended here only, one line per completion.
  std::ofstream checkpoint;
  if (checkpointing) {
    if (options.checkpoint.has_parent_path()) std::filesystem::create_directories(options.checkpoint.parent_path());
    checkpoint.open(options.checkpoint, std::ios::app | std::ios::binary);
    if (!checkpoint) throw Error(ErrorCode::IoError, "cannot open checkpoint " + options.checkpoint.string());
  }
  for (std::size_t done = 0; done < pending.size(); ++done) {
    std::unique_lock lock(mu);
    cv.wait(lock, [&] { return !completed.empty(); });
    auto outcome = std::move(completed.front());
    completed.pop_front();
    lock.unlock();
    if (checkpointing) {
      checkpoint << annotation_to_jsonl_line(outcome.annotation) << '\n';
      checkpoint.flush();
    }
    if (outcome.failure) result.failures.push_back(std::move(*outcome.failure));
    result.annotations[outcome.index] = std::move(outcome.annotation);
  }
  for (auto& t : pool) t.join();
  if (checkpointing) {
    checkpoint.close();
    save_annotations(options.checkpoint, result.annotations);
  }

  std::sort(result.failures.begin(), result.failures.end(),
            [](const auto& a, const auto& b) { return a.record_id < b.record_id; });
  result.requests_issued = requests.load();
  return result;
}

double floor_coverage_pct(std::size_t succeeded, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::EmptyResults, "coverage over zero records");
  const auto basis_points = (static_cast<unsigned long long>(succeeded) * 10000ULL) / total;
  return static_cast<double>(basis_points) / 100.0;
}

WordStats word_stats(std::span<const std::size_t> word_counts) {
  if (word_counts.empty()) throw Error(ErrorCode::NoAnnotations, "no word counts");
  std::vector<std::size_t> sorted(word_counts.begin(), word_counts.end());
  std::sort(sorted.begin(), sorted.end());
  WordStats s;
  s.min = sorted.front();
  s.max = sorted.back();
  s.median = sorted[(sorted.size() - 1) / 2];
  const double sum = std::accumulate(sorted.begin(), sorted.end(), 0.0);
  s.mean = sum / static_cast<double>(sorted.size());
  return s;
}

CoverageReport coverage_stats(std::span<const CotAnnotation> annotations, std::size_t total) {
  if (annotations.size() > total) {
    throw Error(ErrorCode::ConfigError, "more annotations than records");
  }
  std::vector<std::size_t> counts;
  for (const auto& a : annotations) {
    if (a.ok()) counts.push_back(a.word_count);
  }
  if (counts.empty()) throw Error(ErrorCode::NoAnnotations, "no successful annotations");
  CoverageReport r;
  r.total = total;
  r.succeeded = counts.size();
  r.coverage_pct = floor_coverage_pct(r.succeeded, total);
  r.words = word_stats(counts);
  return r;
}

}  // namespace medcot
