#include "pct/runner/runner.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <future>
#include <mutex>
#include <thread>

#include "pct/core/errors.hpp"
#include "pct/metrics/remote_embedder.hpp"
#include "pct/scorer/ngram.hpp"
#include "pct/scorer/remote_scorer.hpp"
#include "pct/version.hpp"

namespace pct::runner {
namespace {

constexpr const char* kReconstructPrompt =
    "The text below was compressed by deleting words. Reconstruct the original text. "
    "Reply with the reconstructed text only.";
constexpr const char* kSummarizePrompt = "Summarize the following text in a few sentences.";

std::string answer_prompt(datasets::Task task) {
  switch (task) {
    case datasets::Task::Math:
      return "Solve the problem step by step. End your reply with '#### ' followed by the final number.";
    case datasets::Task::Boolean:
    case datasets::Task::Lies:
      return "Answer the question. End your reply with True or False.";
    case datasets::Task::MultipleChoice:
      return "Answer the question. End your reply with the letter of the correct option in parentheses, "
             "for example (A).";
    default:
      return "Answer the question concisely. Reply with the answer only.";
  }
}

metrics::AnswerTask answer_task(datasets::Task task) {
  switch (task) {
    case datasets::Task::Math: return metrics::AnswerTask::Gsm8k;
    case datasets::Task::Boolean:
    case datasets::Task::Lies: return metrics::AnswerTask::Boolean;
    case datasets::Task::MultipleChoice: return metrics::AnswerTask::MultipleChoice;
    default: return metrics::AnswerTask::Freeform;
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void add_scores(ReportRow& row, const std::vector<metrics::MetricValue>& values, const std::string& suffix) {
  for (const auto& v : values) {
    if (v.skipped) {
      row.skipped_metrics.push_back(v.name + suffix);
    } else {
      row.metrics[v.name + suffix] = v.value;
    }
  }
}

class RowEvaluator {
 public:
  RowEvaluator(const RunConfig& config, const RunEnvironment& env, double ratio)
      : config_(config), env_(env), ratio_(ratio) {}

  ReportRow operator()(const datasets::DatasetRecord& record) const {
    CompressionRequest request;
    request.text = record.source;
    request.compressor = config_.compressor;
    request.ratio = ratio_;
    request.question = record.question;
    request.max_length = config_.max_length;
    request.seed = config_.seed;
    request.options = config_.options;
    const auto result = compress(request, env_.backends);

    ReportRow row;
    row.id = record.id;
    row.achieved_ratio = result.achieved_ratio;
    row.compressed = result.compressed;
    const auto* embedder = env_.embedder.get();

    switch (config_.mode) {
      case Mode::IntrinsicReconstruction: {
        const auto reply = env_.llm->complete({kReconstructPrompt, result.compressed});
        row.latency_ms = reply.latency_ms;
        for (const auto& m : config_.metrics) {
          add_scores(row, score_text(m, reply.text, record.source, embedder), "");
          add_scores(row, score_text(m, reply.text, result.compressed, embedder), "@compressed");
        }
        break;
      }
      case Mode::IntrinsicSummarization: {
        const auto original = env_.llm->complete({kSummarizePrompt, record.source});
        const auto compressed = env_.llm->complete({kSummarizePrompt, result.compressed});
        row.latency_ms = original.latency_ms + compressed.latency_ms;
        for (const auto& m : config_.metrics) {
          add_scores(row, score_text(m, compressed.text, original.text, embedder), "");
        }
        break;
      }
      case Mode::ExtrinsicAnswer: {
        std::string user = result.compressed;
        if (record.question && !config_.options.include_question) user += "\n\nQuestion: " + *record.question;
        const auto reply = env_.llm->complete({answer_prompt(record.task), user});
        row.latency_ms = reply.latency_ms;
        const auto gold = record.answer ? record.answer : record.reference;
        if (!gold) throw DatasetError(0, "record has no gold answer");
        const auto predicted = metrics::extract_answer(reply.text, answer_task(record.task));
        for (const auto& m : config_.metrics) {
          if (m == "accuracy") {
            const std::string p[] = {predicted};
            const std::string g[] = {*gold};
            row.metrics["accuracy"] = metrics::accuracy(p, g).value;
          } else {
            add_scores(row, score_text(m, predicted, *gold, embedder), "");
          }
        }
        break;
      }
    }
    return row;
  }

 private:
  const RunConfig& config_;
  const RunEnvironment& env_;
  double ratio_;
};

struct RowOutcome {
  std::optional<ReportRow> row;
  std::string skip_reason;
};

// Runs one row on a helper thread so a wedged row can be abandoned. The
// helper owns copies of everything it touches.
RowOutcome run_row(std::shared_ptr<const RunConfig> config, std::shared_ptr<const RunEnvironment> env,
                   double ratio, const datasets::DatasetRecord& record) {
  auto promise = std::make_shared<std::promise<RowOutcome>>();
  auto future = promise->get_future();
  std::thread([promise, config, env, ratio, record] {
    RowOutcome outcome;
    try {
      outcome.row = RowEvaluator(*config, *env, ratio)(record);
    } catch (const UpstreamError& e) {
      outcome.skip_reason = "upstream error (status " + std::to_string(e.status()) + "): " + e.what();
    } catch (const std::exception& e) {
      outcome.skip_reason = e.what();
    }
    promise->set_value(std::move(outcome));
  }).detach();
  if (future.wait_for(std::chrono::milliseconds(config->row_timeout_ms)) == std::future_status::timeout) {
    return {std::nullopt, "timed out after " + std::to_string(config->row_timeout_ms) + " ms"};
  }
  return future.get();
}

void check_pairings(const RunConfig& config, const datasets::DatasetManifest& manifest) {
  for (const auto& m : config.metrics) {
    if (!datasets::supports_metric(manifest, m)) {
      throw ConfigError("metric '" + m + "' is not supported for dataset '" + manifest.name + "'");
    }
  }
  if (!datasets::supports_compressor(manifest, config.compressor)) {
    throw ConfigError("compressor " + std::string(to_string(config.compressor)) + " is not supported for dataset '" +
                      manifest.name + "'");
  }
  if (config.mode == Mode::ExtrinsicAnswer && !datasets::needs_answer(manifest.task) &&
      manifest.family != datasets::Family::LongBench) {
    throw ConfigError("dataset '" + manifest.name + "' has no gold answers for mode extrinsic_answer");
  }
}

void preflight(const RunConfig& config, const RunEnvironment& env) {
  if (config.target_llm) env.llm->probe();
  if (config.compressor == CompressorKind::KiS && config.generator) {
    net::EndpointClient(*config.generator, net::make_transport(*config.generator)).probe();
  }
  if (config.scorer.remote && config.scorer.type == "remote") {
    net::EndpointClient(*config.scorer.remote, net::make_transport(*config.scorer.remote)).probe();
  }
}

}  // namespace

std::shared_ptr<const Scorer> fit_scorer(const ScorerConfig& config, const std::filesystem::path& data_root,
                                         const std::vector<datasets::DatasetRecord>& records) {
  if (config.type == "remote") {
    if (!config.remote) throw ConfigError("scorer type remote requires scorer.remote");
    return std::make_shared<RemoteScorer>(*config.remote);
  }
  auto files = config.corpus;
  if (files.empty()) files.push_back(data_root / "corpus" / "english.txt");
  std::vector<std::string> corpus;
  for (const auto& f : files) {
    const auto text = tokenize(read_file(f));
    const auto& tokens = text.tokens();
    corpus.insert(corpus.end(), tokens.begin(), tokens.end());
  }
  if (config.include_dataset) {
    for (const auto& r : records) {
      const auto text = tokenize(r.source);
      const auto& tokens = text.tokens();
      corpus.insert(corpus.end(), tokens.begin(), tokens.end());
    }
  }
  try {
    return std::make_shared<NgramModel>(NgramModel::fit(corpus, config.order, config.smoothing_k, config.cache_weight));
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("scorer: ") + e.what());
  }
}

std::vector<metrics::MetricValue> score_text(const std::string& metric, const std::string& hypothesis,
                                             const std::string& reference, const metrics::Embedder* embedder) {
  auto named = [](metrics::MetricValue v, std::string name) {
    v.name = std::move(name);
    return v;
  };
  if (metric == "bleu") {
    const std::string refs[] = {reference};
    return {named(metrics::bleu(hypothesis, refs), "bleu")};
  }
  if (metric == "rouge") {
    return {named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::N(1)), "rouge_1"),
            named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::N(2)), "rouge_2"),
            named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::L()), "rouge_l")};
  }
  if (metric == "rouge_1") return {named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::N(1)), metric)};
  if (metric == "rouge_2") return {named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::N(2)), metric)};
  if (metric == "rouge_l") return {named(metrics::rouge(hypothesis, reference, metrics::RougeVariant::L()), metric)};
  if (metric == "token_f1") return {named(metrics::token_f1(hypothesis, reference), metric)};
  if (metric == "edit_distance") {
    return {named(metrics::edit_distance(hypothesis, reference, metrics::EditUnit::Char), metric)};
  }
  if (metric == "bertscore") return {named(metrics::bertscore(hypothesis, reference, embedder), metric)};
  throw ConfigError("metric '" + metric + "' cannot score text pairs");
}

RunEnvironment build_environment(const RunConfig& config) {
  validate(config);
  RunEnvironment env;
  env.registry = config.registry ? datasets::Registry::load(*config.registry) : datasets::Registry::bundled();
  if (!env.registry.contains(config.dataset)) throw ConfigError("unknown dataset '" + config.dataset + "'");
  const auto& manifest = env.registry.get(config.dataset);
  check_pairings(config, manifest);
  auto records = datasets::load_dataset(manifest);

  const auto data_root = config.registry ? config.registry->parent_path() : datasets::Registry::default_data_root();
  env.backends.scorer = fit_scorer(config.scorer, data_root, records);
  if (config.generator) env.backends.generator = std::make_shared<ChatGenerator>(*config.generator);
  if (config.scrl_policy) {
    try {
      env.backends.scrl_policy = ScrlPolicy::from_json(nlohmann::json::parse(read_file(*config.scrl_policy)));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("SCRL policy " + config.scrl_policy->string() + ": " + e.what());
    }
  }
  if (config.target_llm) {
    env.llm = std::make_shared<RemoteLlm>(*config.target_llm, config.llm_mode);
  } else {
    env.llm = std::make_shared<EchoLlm>();
  }
  if (config.embedder) env.embedder = std::make_shared<metrics::RemoteEmbedder>(*config.embedder);
  return env;
}

EvalReport run_eval(const RunConfig& config, const RunEnvironment& env) {
  validate(config);
  if (!env.registry.contains(config.dataset)) throw ConfigError("unknown dataset '" + config.dataset + "'");
  const auto& manifest = env.registry.get(config.dataset);
  check_pairings(config, manifest);
  if (!env.backends.scorer) throw ConfigError("run environment has no scorer");
  if (!env.llm) throw ConfigError("run environment has no LLM client");

  auto records = datasets::load_dataset(manifest);
  if (config.limit && *config.limit < records.size()) records.resize(*config.limit);

  preflight(config, env);

  auto shared_config = std::make_shared<const RunConfig>(config);
  auto shared_env = std::make_shared<const RunEnvironment>(env);

  EvalReport report;
  report.config = config.to_json();
  report.toolkit_version = std::string(kToolkitVersion);
  report.timestamp = utc_timestamp();

  for (double ratio : config.ratios) {
    std::vector<RowOutcome> outcomes(records.size());
    std::atomic<std::size_t> next{0};
    {
      const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.concurrency), records.size());
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t i = next++; i < records.size(); i = next++) {
            outcomes[i] = run_row(shared_config, shared_env, ratio, records[i]);
          }
        });
      }
    }

    ReportSection section;
    section.ratio = ratio;
    section.dataset_size = records.size();
    for (std::size_t i = 0; i < records.size(); ++i) {
      if (outcomes[i].row) {
        section.rows.push_back(std::move(*outcomes[i].row));
      } else {
        section.skips.push_back({records[i].id, outcomes[i].skip_reason});
      }
    }
    compute_aggregates(section);
    report.sections.push_back(std::move(section));
  }
  return report;
}

EvalReport run_eval(const RunConfig& config) { return run_eval(config, build_environment(config)); }

}  // namespace pct::runner
