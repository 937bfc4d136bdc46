#include <doctest.h>

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "pct/core/errors.hpp"
#include "pct/mock/mock_openai.hpp"
#include "pct/runner/runner.hpp"
#include "support/helpers.hpp"

using namespace pct;
using namespace pct::runner;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pct_test_runner" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

void write(const std::filesystem::path& p, const std::string& content) { std::ofstream(p) << content; }

// A registry over small hand-written datasets in a scratch directory.
datasets::Registry small_registry(const std::filesystem::path& dir) {
  write(dir / "two.jsonl",
        "{\"id\":\"r1\",\"text\":\"The river runs through the old city.\"}\n"
        "{\"id\":\"r2\",\"text\":\"A cold report said the data was new, and the model was quick.\"}\n");
  write(dir / "math.jsonl",
        "{\"question\":\"What is 2 + 2?\",\"answer\":\"2 + 2 = 4 #### 4\"}\n"
        "{\"question\":\"What is 3 + 4?\",\"answer\":\"#### 7\"}\n"
        "{\"question\":\"What is 5 + 5?\",\"answer\":\"#### 10\"}\n");
  write(dir / "summ.jsonl",
        "{\"text\":\"Paris is a city on a river. It was cold in London.\",\"summary\":\"Paris and London.\"}\n");
  const nlohmann::json reg = {
      {"datasets",
       {{{"name", "two"},
         {"family", "reconstruction"},
         {"task", "reconstruction"},
         {"path", "two.jsonl"},
         {"metrics", {"bleu", "rouge", "token_f1", "edit_distance", "bertscore"}}},
        {{"name", "math"}, {"family", "gsm8k"}, {"task", "math"}, {"path", "math.jsonl"}},
        {{"name", "summ"}, {"family", "summarization"}, {"task", "summarization"}, {"path", "summ.jsonl"}}}}};
  return datasets::Registry::from_json(reg, dir);
}

RunEnvironment environment(const std::filesystem::path& dir, std::shared_ptr<const LlmClient> llm) {
  RunEnvironment env;
  env.registry = small_registry(dir);
  env.backends.scorer = std::make_shared<NgramModel>(test::english_model());
  env.llm = llm ? std::move(llm) : std::make_shared<EchoLlm>();
  return env;
}

RunConfig config(std::string dataset, std::vector<std::string> metrics, std::vector<double> ratios) {
  RunConfig c;
  c.name = "t";
  c.dataset = std::move(dataset);
  c.metrics = std::move(metrics);
  c.ratios = std::move(ratios);
  c.row_timeout_ms = 20000;
  return c;
}

// Answers with the gold marker for one question and nonsense otherwise.
class ScriptedLlm final : public LlmClient {
 public:
  LlmReply complete(const ChatPrompt& prompt) const override {
    ++calls;
    if (prompt.user.find("2 + 2") != std::string::npos) return {"Two and two make four. #### 4", 2.0};
    if (prompt.user.find("3 + 4") != std::string::npos) return {"#### 7.0", 2.0};
    if (prompt.user.find("5 + 5") != std::string::npos) throw UpstreamError(500, "model overloaded");
    return {"words only", 2.0};
  }
  void probe() const override {
    if (unreachable) throw UpstreamError(0, "unreachable");
  }
  bool unreachable = false;
  mutable std::atomic<int> calls{0};
};

class SlowLlm final : public LlmClient {
 public:
  LlmReply complete(const ChatPrompt& prompt) const override {
    if (prompt.user.find("cold") != std::string::npos) std::this_thread::sleep_for(std::chrono::milliseconds(400));
    return {prompt.user, 0.0};
  }
};

nlohmann::json without_timestamp(const EvalReport& r) {
  auto j = to_json(r);
  j.erase("timestamp");
  return j;
}

}  // namespace

TEST_CASE("echo reconstruction scores zero edit distance") {
  const auto dir = scratch_dir("echo");
  const auto env = environment(dir, nullptr);
  const auto report = run_eval(config("two", {"edit_distance"}, {0.0}), env);
  REQUIRE(report.sections.size() == 1);
  const auto& s = report.sections[0];
  CHECK(s.rows.size() == 2);
  CHECK(s.skips.empty());
  CHECK(s.means.at("edit_distance") == 0.0);
  CHECK(s.means.at("edit_distance@compressed") == 0.0);
  CHECK(s.mean_achieved_ratio == 0.0);
  CHECK(s.rows[0].id == "r1");
  CHECK(s.rows[1].id == "r2");
}

TEST_CASE("echo reconstruction of compressed text matches the compressed prompt") {
  const auto dir = scratch_dir("echo_half");
  const auto report = run_eval(config("two", {"edit_distance", "rouge"}, {0.5}), environment(dir, nullptr));
  const auto& s = report.sections.at(0);
  CHECK(s.means.at("edit_distance@compressed") == 0.0);
  CHECK(s.means.at("edit_distance") > 0.0);
  CHECK(s.means.at("rouge_l@compressed") == 1.0);
  for (const auto& key : {"rouge_1", "rouge_2", "rouge_l"}) CHECK(s.means.contains(key));
}

TEST_CASE("a ratio list gives one section per ratio") {
  const auto dir = scratch_dir("sweep");
  const auto report = run_eval(config("two", {"bleu"}, {0.1, 0.3}), environment(dir, nullptr));
  REQUIRE(report.sections.size() == 2);
  CHECK(report.sections[0].ratio == 0.1);
  CHECK(report.sections[1].ratio == 0.3);
  for (const auto& s : report.sections) CHECK(s.rows.size() == 2);
}

TEST_CASE("repeated runs give identical reports apart from the timestamp") {
  const auto dir = scratch_dir("repeat");
  const auto env = environment(dir, nullptr);
  auto c = config("two", {"bleu", "token_f1", "edit_distance"}, {0.2, 0.6});
  c.concurrency = 3;
  const auto a = run_eval(c, env);
  const auto b = run_eval(c, env);
  CHECK(without_timestamp(a) == without_timestamp(b));
  CHECK(render_report(a, ReportFormat::Csv) == render_report(b, ReportFormat::Csv));
}

TEST_CASE("extrinsic answers are extracted and failures become skips") {
  const auto dir = scratch_dir("extrinsic");
  auto llm = std::make_shared<ScriptedLlm>();
  const auto env = environment(dir, llm);
  auto c = config("math", {"accuracy"}, {0.0});
  c.mode = Mode::ExtrinsicAnswer;
  c.target_llm = net::EndpointConfig{};
  c.target_llm->base_url = "http://unused/v1";
  c.concurrency = 2;
  const auto report = run_eval(c, env);
  const auto& s = report.sections.at(0);
  CHECK(s.dataset_size == 3);
  REQUIRE(s.rows.size() == 2);
  REQUIRE(s.skips.size() == 1);
  CHECK(s.rows[0].metrics.at("accuracy") == 1.0);
  CHECK(s.rows[1].metrics.at("accuracy") == 1.0);  // 7.0 == 7
  CHECK(s.skips[0].id == "math.jsonl:3");
  CHECK(s.skips[0].reason.find("500") != std::string::npos);
  CHECK(s.means.at("accuracy") == 1.0);
}

TEST_CASE("unreachable target LLM fails before any row") {
  const auto dir = scratch_dir("preflight");
  auto llm = std::make_shared<ScriptedLlm>();
  llm->unreachable = true;
  auto c = config("math", {"accuracy"}, {0.0});
  c.mode = Mode::ExtrinsicAnswer;
  c.target_llm = net::EndpointConfig{};
  c.target_llm->base_url = "http://unused/v1";
  CHECK_THROWS_AS(run_eval(c, environment(dir, llm)), UpstreamError);
  CHECK(llm->calls == 0);
}

TEST_CASE("summarization compares the two summaries") {
  const auto dir = scratch_dir("summ");
  const auto report = run_eval(config("summ", {"token_f1"}, {0.0}), environment(dir, nullptr));
  // Echo returns each text unchanged and ratio 0 keeps everything.
  CHECK(report.sections.at(0).means.at("token_f1") == 1.0);
}

TEST_CASE("slow rows time out into skips") {
  const auto dir = scratch_dir("timeout");
  auto c = config("two", {"bleu"}, {0.0});
  c.row_timeout_ms = 100;
  c.concurrency = 2;
  const auto report = run_eval(c, environment(dir, std::make_shared<SlowLlm>()));
  const auto& s = report.sections.at(0);
  CHECK(s.rows.size() + s.skips.size() == s.dataset_size);
  REQUIRE(s.skips.size() == 1);
  CHECK(s.skips[0].id == "r2");
  CHECK(s.skips[0].reason.find("timed out") != std::string::npos);
  std::this_thread::sleep_for(std::chrono::milliseconds(500));
}

TEST_CASE("parameter violations become skips") {
  const auto dir = scratch_dir("window");
  auto c = config("two", {"bleu"}, {0.0});
  c.compressor = CompressorKind::SCRL;
  c.max_length = 10;  // r1 has 8 tokens, r2 has 15
  const auto report = run_eval(c, environment(dir, nullptr));
  const auto& s = report.sections.at(0);
  REQUIRE(s.skips.size() == 1);
  CHECK(s.skips[0].id == "r1");
  CHECK(s.skips[0].reason.find("context window") != std::string::npos);
}

TEST_CASE("invalid configurations are config errors") {
  const auto dir = scratch_dir("invalid");
  const auto env = environment(dir, nullptr);
  CHECK_THROWS_AS(run_eval(config("two", {"meteor"}, {0.5}), env), ConfigError);
  CHECK_THROWS_AS(run_eval(config("two", {"accuracy"}, {0.5}), env), ConfigError);
  CHECK_THROWS_AS(run_eval(config("two", {"bleu"}, {1.0}), env), ConfigError);
  CHECK_THROWS_AS(run_eval(config("nope", {"bleu"}, {0.5}), env), ConfigError);
  CHECK_THROWS_AS(run_eval(config("two", {}, {0.5}), env), ConfigError);
  auto extrinsic = config("math", {"accuracy"}, {0.5});
  extrinsic.mode = Mode::ExtrinsicAnswer;
  CHECK_THROWS_AS(run_eval(extrinsic, env), ConfigError);
  auto on_text = config("two", {"accuracy"}, {0.5});
  on_text.mode = Mode::ExtrinsicAnswer;
  on_text.target_llm = net::EndpointConfig{};
  on_text.target_llm->base_url = "http://unused/v1";
  CHECK_THROWS_AS(run_eval(on_text, env), ConfigError);
  auto kis = config("two", {"bleu"}, {0.5});
  kis.compressor = CompressorKind::KiS;
  CHECK_THROWS_AS(run_eval(kis, env), ConfigError);
  auto zero = config("two", {"bleu"}, {0.5});
  zero.concurrency = 0;
  CHECK_THROWS_AS(run_eval(zero, env), ConfigError);
}

TEST_CASE("bertscore without an embedder is itemized as skipped") {
  const auto dir = scratch_dir("bert");
  const auto report = run_eval(config("two", {"bertscore"}, {0.0}), environment(dir, nullptr));
  const auto& s = report.sections.at(0);
  CHECK(s.rows.size() == 2);
  CHECK(s.rows[0].skipped_metrics == std::vector<std::string>{"bertscore", "bertscore@compressed"});
  CHECK_FALSE(s.means.contains("bertscore"));
}

TEST_CASE("run_eval builds its environment from a config") {
  const auto dir = scratch_dir("built");
  small_registry(dir);
  write(dir / "registry.json",
        R"({"datasets":[{"name":"two","family":"reconstruction","task":"reconstruction","path":"two.jsonl"}]})");
  write(dir / "corpus.txt", "the river runs through the city and the model reads the report");
  auto c = config("two", {"rouge"}, {0.4});
  c.registry = dir / "registry.json";
  c.scorer.corpus = {dir / "corpus.txt"};
  c.compressor = CompressorKind::Lingua;
  const auto report = run_eval(c);
  CHECK(report.sections.at(0).rows.size() == 2);
  CHECK(report.config["dataset"] == "two");
}

// ---- reports --------------------------------------------------------------

namespace {

EvalReport sample_report() {
  EvalReport r;
  r.config = {{"name", "sample"}};
  r.toolkit_version = "0.0.0";
  r.timestamp = "2026-01-01T00:00:00Z";
  ReportSection s;
  s.ratio = 0.5;
  s.dataset_size = 3;
  s.rows.push_back({"a", 0.5, 1.25, {{"bleu", 0.25}, {"rouge_l", 1.0}}, {}, "x y"});
  s.rows.push_back({"b", 0.4, 2.0, {{"bleu", 0.5}}, {"bertscore"}, "z, \"q\""});
  s.skips.push_back({"c", "timed out"});
  compute_aggregates(s);
  r.sections.push_back(s);
  ReportSection empty;
  empty.ratio = 0.9;
  empty.dataset_size = 1;
  empty.skips.push_back({"a", "upstream error"});
  compute_aggregates(empty);
  r.sections.push_back(empty);
  return r;
}

}  // namespace

TEST_CASE("aggregates are means over the rows that carry each metric") {
  const auto r = sample_report();
  const auto& s = r.sections[0];
  CHECK(s.means.at("bleu") == 0.375);
  CHECK(s.means.at("rouge_l") == 1.0);
  CHECK(*s.mean_achieved_ratio == doctest::Approx(0.45));
  CHECK(r.sections[1].empty());
  CHECK_FALSE(r.sections[1].mean_achieved_ratio);
}

TEST_CASE("report JSON round-trip") {
  const auto r = sample_report();
  const auto j = to_json(r);
  CHECK(report_from_json(nlohmann::json::parse(j.dump())) == r);
  CHECK(j["sections"][1]["aggregates"]["empty"] == true);
  CHECK(j["sections"][1]["aggregates"]["mean_achieved_ratio"].is_null());
  CHECK(j["sections"][0]["aggregates"]["empty"] == false);

  const auto dir = scratch_dir("report");
  write_report(r, ReportFormat::Json, dir / "r.json");
  CHECK(read_report(dir / "r.json") == r);
  const auto text = render_report(r, ReportFormat::Json);
  CHECK(text.back() == '\n');
  CHECK(text.find("\"config\"") < text.find("\"sections\""));
}

TEST_CASE("CSV has a header, one line per row and one aggregate line per section") {
  const auto r = sample_report();
  const auto csv = render_report(r, ReportFormat::Csv);
  std::istringstream in(csv);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  REQUIRE(lines.size() == 1 + 2 + 2);
  CHECK(lines[0] == "ratio,id,achieved_ratio,latency_ms,bleu,rouge_l");
  CHECK(lines[3].find("__mean__") != std::string::npos);
  CHECK(lines[4].find("empty") != std::string::npos);
  CHECK(lines[2].back() == ',');  // b has no rouge_l
}

TEST_CASE("write_report names the path on failure") {
  try {
    write_report(sample_report(), ReportFormat::Json, "/nonexistent-dir/x/report.json");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("/nonexistent-dir/x/report.json") != std::string::npos);
  }
  CHECK(parse_report_format("csv") == ReportFormat::Csv);
  CHECK_FALSE(parse_report_format("xml"));
}

// ---- config files ---------------------------------------------------------

TEST_CASE("eval files merge defaults into runs") {
  const auto dir = scratch_dir("evalfile");
  write(dir / "eval.json", R"({
    "defaults": {"dataset": "two", "metrics": ["bleu"], "ratio": [0.2, 0.4], "seed": 3,
                 "target_llm": {"base_url": "http://a/v1", "model": "m", "cassette": "c.jsonl",
                                "cassette_mode": "replay"}},
    "runs": [{"compressor": "lingua"},
             {"compressor": "scrl", "ratio": 0.5, "max_length": 12, "name": "custom"}]})");
  const auto runs = load_eval_file(dir / "eval.json");
  REQUIRE(runs.size() == 2);
  CHECK(runs[0].name == "two-Lingua");
  CHECK(runs[0].ratios == std::vector<double>{0.2, 0.4});
  CHECK(runs[0].seed == 3);
  CHECK(runs[0].target_llm->cassette == (dir / "c.jsonl").string());
  CHECK(runs[1].name == "custom");
  CHECK(runs[1].ratios == std::vector<double>{0.5});
  CHECK(runs[1].max_length == 12);
  CHECK(runs[1].compressor == CompressorKind::SCRL);
  const auto echo = runs[0].to_json();
  CHECK(echo["target_llm"]["cassette"] == "c.jsonl");
}

TEST_CASE("environment variables override endpoints") {
  const auto dir = scratch_dir("env");
  write(dir / "eval.json", R"({"dataset": "two", "metrics": ["bleu"], "compressor": "sc",
    "target_llm": {"base_url": "http://a/v1", "model": "m", "cassette": "c.jsonl"}})");
  ::setenv("PCT_LLM_BASE_URL", "http://b/v1", 1);
  ::setenv("PCT_CASSETTE_MODE", "record", 1);
  ::setenv("PCT_API_KEY_ENV", "MY_KEY", 1);
  const auto runs = load_eval_file(dir / "eval.json");
  ::unsetenv("PCT_LLM_BASE_URL");
  ::unsetenv("PCT_CASSETTE_MODE");
  ::unsetenv("PCT_API_KEY_ENV");
  REQUIRE(runs.size() == 1);
  CHECK(runs[0].target_llm->base_url == "http://b/v1");
  CHECK(runs[0].target_llm->cassette_mode == net::CassetteMode::Record);
  CHECK(runs[0].target_llm->api_key_env == "MY_KEY");
}

TEST_CASE("malformed eval files are config errors") {
  const auto dir = scratch_dir("bad");
  write(dir / "a.json", "{not json");
  CHECK_THROWS_AS(load_eval_file(dir / "a.json"), ConfigError);
  write(dir / "b.json", R"({"dataset": "two", "metrics": ["bleu"], "compressor": "zip"})");
  CHECK_THROWS_AS(load_eval_file(dir / "b.json"), ConfigError);
  write(dir / "c.json", R"({"dataset": "two", "metrics": ["bleu"], "compressor": "sc", "params": {"x": 1}})");
  CHECK_THROWS_AS(load_eval_file(dir / "c.json"), ConfigError);
  write(dir / "d.json", R"({"dataset": "two", "metrics": ["bleu"], "compressor": "sc", "mode": "vibes"})");
  CHECK_THROWS_AS(load_eval_file(dir / "d.json"), ConfigError);
  write(dir / "e.json", R"({"dataset": "two", "metrics": ["bleu"], "compressor": "sc",
    "target_llm": {"base_url": "http://a/v1", "api_key": "sk-secret"}})");
  CHECK_THROWS_AS(load_eval_file(dir / "e.json"), ConfigError);
  CHECK_THROWS_AS(load_eval_file(dir / "missing.json"), ConfigError);
}

TEST_CASE("remote target LLM against the mock server") {
  mock::MockOpenAi server;
  server.start();
  net::EndpointConfig cfg;
  cfg.base_url = server.base_url();
  cfg.model = "mock-1";
  const RemoteLlm llm(cfg);
  CHECK_NOTHROW(llm.probe());
  const auto reply = llm.complete({"Reconstruct the original text.", "river city"});
  CHECK(reply.text == "river city");
  const RemoteLlm completion(cfg, LlmMode::Completion);
  CHECK(completion.request_body({"sys", "user"})["prompt"] == "sys\n\nuser");
  CHECK(llm.request_body({"sys", "user"})["temperature"] == 0);
  server.stop();
}
