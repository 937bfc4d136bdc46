#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pct/compressors/toolkit.hpp"
#include "pct/core/errors.hpp"
#include "pct/datasets/registry.hpp"
#include "pct/runner/runner.hpp"
#include "pct/service/service.hpp"

namespace {

constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::string read_input(const std::string& input) {
  if (input == "-") return {std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  std::ifstream in(input, std::ios::binary);
  if (!in) throw pct::ConfigError("cannot open input " + input);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

pct::service::ServiceConfig service_config(const std::string& path) {
  return path.empty() ? pct::service::ServiceConfig{} : pct::service::load_service_config(path);
}

struct CompressArgs {
  std::string compressor;
  double ratio = 0.0;
  std::optional<std::string> question;
  std::optional<std::int64_t> max_length;
  std::string input = "-";
  std::string params;
  std::uint64_t seed = 0;
  std::string config;
  bool json = false;
};

int run_compress(const CompressArgs& args) {
  pct::CompressionRequest request;
  const auto kind = pct::parse_compressor(args.compressor);
  if (!kind) throw pct::ParameterError("compressor", "unknown compressor '" + args.compressor + "'");
  request.compressor = *kind;
  request.text = read_input(args.input);
  request.ratio = args.ratio;
  request.question = args.question;
  request.max_length = args.max_length;
  request.seed = args.seed;
  if (!args.params.empty()) {
    try {
      request.options = pct::options_from_json(nlohmann::json::parse(args.params));
    } catch (const nlohmann::json::parse_error& e) {
      throw pct::ParameterError("params", std::string("--params is not valid JSON: ") + e.what());
    }
  }
  const auto backends = pct::service::build_backends(service_config(args.config));
  const auto result = pct::compress(request, backends);
  if (args.json) {
    auto trace = nlohmann::json::array();
    for (const auto& t : result.trace) trace.push_back({{"token", t.token}, {"score", t.score}, {"kept", t.kept}});
    std::cout << nlohmann::json{{"compressed", result.compressed},
                                {"original_len", result.original_len},
                                {"compressed_len", result.compressed_len},
                                {"achieved_ratio", result.achieved_ratio},
                                {"trace", trace},
                                {"notes", result.notes}}
                     .dump(2)
              << '\n';
  } else {
    std::cout << result.compressed << '\n';
  }
  for (const auto& note : result.notes) std::cerr << "note: " << note << '\n';
  return 0;
}

struct EvalArgs {
  std::string config;
  std::string output;
  std::string format = "json";
};

int run_eval(const EvalArgs& args) {
  const auto format = pct::runner::parse_report_format(args.format);
  if (!format) throw pct::ConfigError("--format must be json or csv");
  const auto runs = pct::runner::load_eval_file(args.config);
  for (const auto& run : runs) pct::runner::validate(run);

  const bool many = runs.size() > 1;
  if (many && !args.output.empty()) std::filesystem::create_directories(args.output);
  for (const auto& run : runs) {
    const auto report = pct::runner::run_eval(run);
    std::size_t skips = 0;
    for (const auto& s : report.sections) skips += s.skips.size();
    if (args.output.empty()) {
      std::cout << pct::runner::render_report(report, *format);
    } else {
      std::filesystem::path path = args.output;
      if (many) path /= run.name + "." + args.format;
      pct::runner::write_report(report, *format, path);
      std::cerr << run.name << ": " << report.sections.size() << " section(s), " << skips << " skipped row(s) -> "
                << path.string() << '\n';
    }
  }
  return 0;
}

int run_datasets_list(const std::string& registry_file) {
  const auto registry =
      registry_file.empty() ? pct::datasets::Registry::bundled() : pct::datasets::Registry::load(registry_file);
  for (const auto& m : registry.manifests()) {
    std::string compressors;
    for (auto kind : m.compressors) {
      if (!compressors.empty()) compressors += ',';
      compressors += pct::to_string(kind);
    }
    std::string metrics;
    for (const auto& metric : m.metrics) {
      if (!metrics.empty()) metrics += ',';
      metrics += metric;
    }
    std::cout << m.name << '\t' << pct::datasets::to_string(m.family) << '\t' << pct::datasets::to_string(m.task)
              << '\t' << metrics << '\t' << compressors << '\t' << m.path.string() << '\n';
  }
  return 0;
}

struct ServeArgs {
  std::string config;
  std::optional<int> port;
  std::optional<std::string> host;
};

int run_serve(const ServeArgs& args) {
  auto config = service_config(args.config);
  if (args.port) config.port = *args.port;
  if (args.host) config.host = *args.host;
  auto service = std::make_shared<const pct::service::Service>(pct::service::build_backends(config));
  pct::service::HttpServer server(service, config.cors_origins);
  const int port = server.bind(config.host, config.port);
  std::cerr << "listening on http://" << config.host << ':' << port << '\n';
  server.listen();
  return 0;
}

struct TrainArgs {
  std::string corpus;
  std::string output;
  std::string config;
  pct::ScrlTrainingConfig training;
};

int run_train(const TrainArgs& args) {
  std::vector<std::string> items;
  std::istringstream lines(read_input(args.corpus));
  for (std::string line; std::getline(lines, line);) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) items.push_back(line);
  }
  if (items.empty()) throw pct::ConfigError("training corpus " + args.corpus + " has no items");
  const auto backends = pct::service::build_backends(service_config(args.config));
  const auto& scorer = *backends.scorer;
  const auto& t = args.training;
  const double before = pct::mean_ratio_gap(t.initial.value_or(pct::ScrlPolicy::default_policy()), items,
                                            t.target_ratio, scorer);
  const auto policy = pct::train_scrl_policy(items, t, scorer);
  const double after = pct::mean_ratio_gap(policy, items, t.target_ratio, scorer);
  std::ofstream out(args.output);
  if (!out) throw pct::Error("cannot open " + args.output + " for writing");
  out << policy.to_json().dump(2) << '\n';
  std::cerr << "mean ratio gap " << before << " -> " << after << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt compression toolkit"};
  app.require_subcommand(1);

  CompressArgs compress_args;
  auto* compress = app.add_subcommand("compress", "Compress one prompt and print the result");
  compress->add_option("--compressor", compress_args.compressor, "SelectiveContext, Lingua, LongLingua, SCRL or KiS")
      ->required();
  compress->add_option("--ratio", compress_args.ratio, "Fraction of tokens to remove, in [0, 1)")->required();
  compress->add_option("--question", compress_args.question, "Question for question-aware compressors");
  compress->add_option("--max-length", compress_args.max_length, "SCRL window or KiS input limit, in tokens");
  compress->add_option("--input", compress_args.input, "Input file, or - for stdin")->capture_default_str();
  compress->add_option("--params", compress_args.params, "Compressor options as a JSON object");
  compress->add_option("--seed", compress_args.seed, "Seed for stochastic compressors");
  compress->add_option("--config", compress_args.config, "Service configuration (scorer, generator)");
  compress->add_flag("--json", compress_args.json, "Print the full result with the token trace");

  EvalArgs eval_args;
  auto* eval = app.add_subcommand("eval", "Run evaluations from a configuration file");
  eval->add_option("--config", eval_args.config, "Evaluation configuration")->required();
  eval->add_option("--output", eval_args.output, "Report file (a directory when the config has several runs)");
  eval->add_option("--format", eval_args.format, "json or csv")->capture_default_str();

  std::string registry_file;
  auto* datasets = app.add_subcommand("datasets", "Dataset registry");
  datasets->require_subcommand(1);
  auto* list = datasets->add_subcommand("list", "List registered datasets");
  list->add_option("--registry", registry_file, "Registry file (defaults to the bundled one)");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
  serve->add_option("--port", serve_args.port, "Port (0 picks a free one)");
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--config", serve_args.config, "Service configuration");

  TrainArgs train_args;
  auto* train = app.add_subcommand("train-scrl", "Train an SCRL policy on a line-per-item corpus");
  train->add_option("--corpus", train_args.corpus, "Corpus file, one item per line")->required();
  train->add_option("--output", train_args.output, "Policy file to write")->required();
  train->add_option("--steps", train_args.training.steps)->capture_default_str();
  train->add_option("--lr", train_args.training.learning_rate)->capture_default_str();
  train->add_option("--target-ratio", train_args.training.target_ratio)->capture_default_str();
  train->add_option("--seed", train_args.training.seed)->capture_default_str();
  train->add_option("--config", train_args.config, "Service configuration (scorer)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*compress) return run_compress(compress_args);
    if (*eval) return run_eval(eval_args);
    if (*list) return run_datasets_list(registry_file);
    if (*serve) return run_serve(serve_args);
    if (*train) return run_train(train_args);
  } catch (const pct::ParameterError& e) {
    std::cerr << "error: " << e.field() << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const pct::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pct::DatasetError& e) {
    std::cerr << "dataset error: " << e.what() << '\n';
    return kConfigError;
  } catch (const pct::UpstreamError& e) {
    std::cerr << "endpoint error (status " << e.status() << "): " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return 0;
}
