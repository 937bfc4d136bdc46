#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "pct/compressors/selection.hpp"
#include "pct/compressors/toolkit.hpp"
#include "pct/core/errors.hpp"
#include "support/helpers.hpp"

using namespace pct;

namespace {

std::vector<std::string> toks(const std::string& s) { return tokenize(s).tokens(); }

std::vector<std::string> kept_tokens(const CompressionResult& r) {
  std::vector<std::string> out;
  for (const auto& e : r.trace) {
    if (e.kept) out.push_back(e.token);
  }
  return out;
}

std::vector<std::size_t> kept_positions(const CompressionResult& r) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    if (r.trace[i].kept) out.push_back(i);
  }
  return out;
}

CompressionRequest request(CompressorKind kind, std::string text, double ratio) {
  CompressionRequest r;
  r.compressor = kind;
  r.text = std::move(text);
  r.ratio = ratio;
  return r;
}

// Each wN token gets N bits.
test::TableScorer numbered_scorer() {
  std::map<std::string, double> bits;
  for (int i = 0; i <= 20; ++i) bits["w" + std::to_string(i)] = i;
  return test::TableScorer(bits);
}

}  // namespace

// ---- selection helpers ----------------------------------------------------

TEST_CASE("top_k picks the largest values with earlier ties") {
  const std::vector<double> v{0.9, 0.2, 0.8, 0.1};
  CHECK(top_k(v, 2) == std::vector<std::size_t>{0, 2});
  const std::vector<double> flat(5, 0.5);
  CHECK(top_k(flat, 3) == std::vector<std::size_t>{0, 1, 2});
  CHECK(top_k(v, 0).empty());
  CHECK(top_k(v, 9).size() == 4);
}

TEST_CASE("prorate splits exactly by largest remainder") {
  const std::vector<std::size_t> sizes{64, 64, 10};
  const auto shares = prorate(69, sizes);
  CHECK(std::accumulate(shares.begin(), shares.end(), std::size_t{0}) == 69);
  CHECK(shares == std::vector<std::size_t>{32, 32, 5});
  const std::vector<std::size_t> even{3, 3};
  CHECK(prorate(3, even) == std::vector<std::size_t>{2, 1});
}

// ---- Selective Context ----------------------------------------------------

TEST_CASE("selective context keeps the highest-surprisal units") {
  const std::vector<double> info{5, 1, 4, 2};
  const auto text = tokenize("w5 w1 w4 w2");
  const auto units = build_units(text, info, Granularity::Token);
  REQUIRE(units.size() == 4);
  CHECK(select_units(units, info, 2) == std::vector<bool>{true, false, true, false});

  auto req = request(CompressorKind::SelectiveContext, "w5 w1 w4 w2", 0.5);
  req.options.granularity = Granularity::Token;
  const auto r = compress_selective_context(req, numbered_scorer());
  CHECK(r.compressed == "w5 w4");
  CHECK(r.achieved_ratio == 0.5);
}

TEST_CASE("selective context with equal-length multi-token units") {
  // Sentences of two tokens each; unit surprisal is the sum of its tokens.
  const auto text = tokenize("w2 w3. w0 w1. w1 w3. w1 w1.");
  const std::vector<double> info{2, 3, 0, 0, 1, 0, 1, 3, 0, 1, 1, 0};
  const auto units = build_units(text, info, Granularity::Sentence);
  REQUIRE(units.size() == 4);
  CHECK(units[0].surprisal == 5.0);
  CHECK(units[2].surprisal == 4.0);
  const auto mask = select_units(units, info, 6);
  const std::vector<bool> want{true, true, true, false, false, false, true, true, true, false, false, false};
  CHECK(mask == want);
}

TEST_CASE("selective context identity at ratio 0") {
  const std::string text = "The river, as ever, ran through the quiet city.\n\nIt was cold.";
  for (auto g : {Granularity::Token, Granularity::Phrase, Granularity::Sentence}) {
    auto req = request(CompressorKind::SelectiveContext, text, 0.0);
    req.options.granularity = g;
    const auto r = compress_selective_context(req, test::english_model());
    CHECK(r.compressed == text);
    CHECK(r.achieved_ratio == 0.0);
  }
}

TEST_CASE("selective context ties go to earlier units") {
  auto req = request(CompressorKind::SelectiveContext, "w3 w3 w3 w3 w3 w3", 0.5);
  req.options.granularity = Granularity::Token;
  const auto r = compress_selective_context(req, numbered_scorer());
  CHECK(kept_positions(r) == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("a crossing unit contributes only its best tokens") {
  const auto text = tokenize("w9 w1 w8");
  const std::vector<double> info{9, 1, 8};
  std::vector<LexicalUnit> one{{0, 3, "w9 w1 w8", 18.0}};
  CHECK(select_units(one, info, 2) == std::vector<bool>{true, false, true});
}

TEST_CASE("phrase units split at punctuation and stopword runs") {
  const auto text = tokenize("the quick model, of the city");
  const std::vector<double> info(text.size(), 1.0);
  const auto units = build_units(text, info, Granularity::Phrase);
  std::vector<std::string> pieces;
  for (const auto& u : units) pieces.push_back(u.text);
  CHECK(pieces == std::vector<std::string>{"the quick model", ",", "of the city"});
}

// ---- Lingua ---------------------------------------------------------------

TEST_CASE("allocate_budget examples") {
  auto b = allocate_budget(100, {20, 500, 10});
  CHECK(b.context_tokens == 70);
  CHECK(b.instruction_tokens == 20);
  CHECK(b.question_tokens == 10);
  CHECK_FALSE(b.overshoot);

  b = allocate_budget(25, {20, 500, 10});
  CHECK(b.context_tokens == 0);
  CHECK(b.overshoot);
  CHECK(b.instruction_tokens + b.question_tokens + b.context_tokens == b.total_tokens);

  b = allocate_budget(40, {0, 500, 0});
  CHECK(b.context_tokens == 40);
  CHECK(b.total_tokens == 40);
}

TEST_CASE("allocate_budget with partial floors tops up from slack") {
  // Floors give 10 and 5; context takes at most its 20 tokens; slack 15 refills
  // the instruction to 20 then the question with the remaining 5 to 10.
  const auto b = allocate_budget(50, {20, 20, 10}, 0.5, 0.5);
  CHECK(b.context_tokens == 20);
  CHECK(b.instruction_tokens == 20);
  CHECK(b.question_tokens == 10);
}

TEST_CASE("fine stage drops the lowest self-information tokens") {
  std::vector<std::string> history;
  std::vector<double> info;
  const auto tokens = toks("w3 w1 w2 w4");
  const auto mask = prune_tokens(numbered_scorer(), tokens, 2, 64, history, info);
  CHECK(mask == std::vector<bool>{true, false, false, true});
  CHECK(info == std::vector<double>{3, 1, 2, 4});
  CHECK(history == std::vector<std::string>{"w3", "w4"});
}

TEST_CASE("coarse stage keeps the lower-perplexity demonstration") {
  const std::vector<double> ppl{2.0, 50.0};
  const std::vector<std::size_t> lengths{10, 10};
  CHECK(select_demonstrations(ppl, lengths, 10, 14) == std::vector<std::size_t>{0});
  const std::vector<double> swapped{50.0, 2.0};
  CHECK(select_demonstrations(swapped, lengths, 10, 14) == std::vector<std::size_t>{1});
  CHECK(select_demonstrations(ppl, lengths, 10, 20) == std::vector<std::size_t>{0, 1});
}

TEST_CASE("lingua drops a high-perplexity demonstration end to end") {
  // Block 1 is all 1-bit tokens (perplexity 2); block 2 is 6-bit tokens.
  const std::string text = "w1 w1 w1 w1 w1\n\nw6 w6 w6 w6 w6";
  auto req = request(CompressorKind::Lingua, text, 0.6);
  const auto r = compress_lingua(req, numbered_scorer());
  CHECK(r.compressed_len == 4);
  CHECK(kept_tokens(r) == std::vector<std::string>(4, "w1"));
}

TEST_CASE("lingua identity at ratio 0") {
  const std::string text = "Q: what is 2 + 2?\nA: 4\n\nQ: and 3 + 3?\nA: 6";
  const auto r = compress_lingua(request(CompressorKind::Lingua, text, 0.0), test::english_model());
  CHECK(r.compressed == text);
}

TEST_CASE("lingua keeps the instruction and reports overshoot") {
  auto req = request(CompressorKind::Lingua, "w1 w2 w3 w4 w5 w6", 0.9);
  req.options.instruction = "Answer briefly:";
  const auto r = compress_lingua(req, numbered_scorer());
  CHECK(r.original_len == 9);
  CHECK(r.compressed.starts_with("Answer briefly:"));
  REQUIRE_FALSE(r.notes.empty());
  CHECK(r.notes.front().find("budget") != std::string::npos);
}

TEST_CASE("document ranking examples") {
  const std::vector<double> rel{0.2, 0.9, 0.5};
  CHECK(order_by_relevance(rel) == std::vector<std::size_t>{1, 2, 0});
  const std::vector<double> tied{0.5, 0.5};
  CHECK(order_by_relevance(tied) == std::vector<std::size_t>{0, 1});

  const auto m = test::english_model(1);
  const std::vector<std::string> one{"anything at all"};
  CHECK(rank_documents("which city?", one, m) == std::vector<std::size_t>{0});
}

TEST_CASE("a document identical to the question ranks first") {
  // Toy vocabulary {x, y, z}; the question shares tokens only with document 1.
  const std::vector<std::string> corpus{"x y z x y z"};
  const auto m = NgramModel::fit(corpus, 1, 1.0);
  const std::vector<std::string> docs{"z z", "x y", "z"};
  const auto rel = document_relevance("x y", docs, m);
  // Add-one unigram: p(x) = p(y) = p(z) = 3/10. With the cache (w = 0.2),
  // conditioning on "x y" gives x and y 0.8 * 0.3 + 0.2 / 2 = 0.34, while
  // conditioning on z alone leaves them at 0.8 * 0.3 = 0.24.
  CHECK(rel[1] == doctest::Approx(1.0 / 0.3 - 1.0 / 0.34));
  CHECK(rel[0] == doctest::Approx(1.0 / 0.3 - 1.0 / 0.24));
  CHECK(rank_documents("x y", docs, m) == std::vector<std::size_t>{1, 0, 2});
}

TEST_CASE("linear rank budgets") {
  const std::vector<std::size_t> lengths{20, 20};
  CHECK(linear_rank_budgets(10, lengths) == std::vector<std::size_t>{7, 3});
  const std::vector<std::size_t> capped{2, 20};
  CHECK(linear_rank_budgets(10, capped) == std::vector<std::size_t>{2, 8});
  const std::vector<std::size_t> three{50, 50, 50};
  CHECK(linear_rank_budgets(12, three) == std::vector<std::size_t>{6, 4, 2});
}

TEST_CASE("long lingua on one document matches lingua") {
  const std::string text = "the model reads the prompt and the river runs through the city of Paris";
  for (double ratio : {0.0, 0.3, 0.6}) {
    auto req = request(CompressorKind::LongLingua, text, ratio);
    req.question = "which city has a river?";
    const auto m = test::english_model();
    auto lingua_req = req;
    lingua_req.compressor = CompressorKind::Lingua;
    CHECK(compress_long_lingua(req, m).compressed == compress_lingua(lingua_req, m).compressed);
  }
}

TEST_CASE("long lingua reorders documents even at ratio 0") {
  const std::string text = "the data was new .\n\nParis is a city on a river .";
  auto req = request(CompressorKind::LongLingua, text, 0.0);
  req.question = "Paris city river";
  const auto r = compress_long_lingua(req, test::english_model(1));
  CHECK(r.compressed == "Paris is a city on a river .\n\nthe data was new .");
  CHECK(r.compressed_len == r.original_len);
}

TEST_CASE("long lingua without a question falls back with a note") {
  const std::string text = "a river\n\na city";
  const auto r = compress_long_lingua(request(CompressorKind::LongLingua, text, 0.0), test::english_model());
  CHECK(r.compressed == text);
  REQUIRE_FALSE(r.notes.empty());
  CHECK(r.notes.front().find("question") != std::string::npos);
}

// ---- SCRL -----------------------------------------------------------------

namespace {

// Policy whose keep-probability is sigma(bits - 3).
ScrlPolicy bits_policy() {
  ScrlPolicy p;
  p.weights[0] = 1.0;
  p.weights[6] = -3.0;
  return p;
}

double logit(double p) { return std::log(p / (1 - p)); }

test::TableScorer probability_scorer(const std::vector<double>& probs) {
  std::map<std::string, double> bits;
  for (std::size_t i = 0; i < probs.size(); ++i) bits["t" + std::to_string(i)] = 3.0 + logit(probs[i]);
  return test::TableScorer(bits);
}

}  // namespace

TEST_CASE("scrl keeps the top-k keep-probabilities") {
  const std::vector<double> probs{0.9, 0.2, 0.8, 0.1};
  const auto scorer = probability_scorer(probs);
  const auto r = compress_scrl(request(CompressorKind::SCRL, "t0 t1 t2 t3", 0.5), bits_policy(), scorer);
  CHECK(r.compressed == "t0 t2");
  for (std::size_t i = 0; i < probs.size(); ++i) CHECK(r.trace[i].score == doctest::Approx(probs[i]));
}

TEST_CASE("scrl window binds below the ratio budget") {
  auto req = request(CompressorKind::SCRL, "t0 t1 t2 t3", 0.0);
  req.max_length = 3;
  const auto r = compress_scrl(req, bits_policy(), probability_scorer({0.9, 0.2, 0.8, 0.1}));
  CHECK(r.compressed == "t0 t1 t2");
  req.max_length = 5;
  CHECK_THROWS_AS(compress_scrl(req, bits_policy(), test::english_model()), ParameterError);
}

TEST_CASE("zero-weight scrl policy keeps the earliest tokens") {
  const ScrlPolicy zero;
  const auto r = compress_scrl(request(CompressorKind::SCRL, "the quick river ran", 0.5), zero,
                               test::english_model());
  CHECK(r.compressed == "the quick");
  for (const auto& e : r.trace) CHECK(e.score == 0.5);
}

TEST_CASE("scrl policy JSON round-trip") {
  const auto p = ScrlPolicy::default_policy();
  CHECK(ScrlPolicy::from_json(p.to_json()) == p);
  CHECK_THROWS(ScrlPolicy::from_json({{"weights", {1, 2}}}));
}

TEST_CASE("scrl features") {
  const auto t = tokenize("The river , said London");
  const auto f = scrl_features(t, 0, 2.5);
  CHECK(f[0] == 2.5);
  CHECK(f[1] == 1.0);
  CHECK(f[2] == 0.0);
  CHECK(f[3] == 0.0);
  CHECK(f[5] == 1.0);
  CHECK(f[6] == 1.0);
  CHECK(scrl_features(t, 2, 0.0)[2] == 1.0);
  CHECK(scrl_features(t, 4, 0.0)[3] == 1.0);
}

namespace {

std::vector<std::string> training_corpus() {
  std::mt19937_64 rng(77);
  std::vector<std::string> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(test::random_text(rng, 8, 24));
  return corpus;
}

}  // namespace

TEST_CASE("scrl training is reproducible") {
  const auto corpus = training_corpus();
  const auto m = test::english_model();
  ScrlTrainingConfig cfg;
  cfg.steps = 50;
  cfg.seed = 5;
  const auto a = train_scrl_policy(corpus, cfg, m);
  const auto b = train_scrl_policy(corpus, cfg, m);
  CHECK(a == b);
  cfg.seed = 6;
  CHECK_FALSE(train_scrl_policy(corpus, cfg, m) == a);
}

TEST_CASE("scrl training with a zero learning rate changes nothing") {
  const auto corpus = training_corpus();
  ScrlTrainingConfig cfg;
  cfg.steps = 1;
  cfg.learning_rate = 0.0;
  CHECK(train_scrl_policy(corpus, cfg, test::english_model()) == ScrlPolicy::default_policy());
  cfg.initial = bits_policy();
  CHECK(train_scrl_policy(corpus, cfg, test::english_model()) == bits_policy());
}

TEST_CASE("scrl training does not widen the ratio gap") {
  const auto corpus = training_corpus();
  const auto m = test::english_model();
  ScrlTrainingConfig cfg;
  cfg.target_ratio = 0.6;
  const double before = mean_ratio_gap(ScrlPolicy::default_policy(), corpus, cfg.target_ratio, m);
  const auto trained = train_scrl_policy(corpus, cfg, m);
  CHECK(mean_ratio_gap(trained, corpus, cfg.target_ratio, m) <= before);
}

TEST_CASE("property: scrl training never widens the ratio gap") {
  std::mt19937_64 rng(38);
  const auto m = test::english_model();
  for (int trial = 0; trial < 15; ++trial) {
    std::vector<std::string> corpus;
    for (int i = 0; i < 5 + trial; ++i) corpus.push_back(test::random_text(rng, 3, 30));
    ScrlTrainingConfig cfg;
    cfg.steps = 40;
    cfg.seed = rng();
    cfg.target_ratio = std::uniform_real_distribution<double>(0.0, 0.95)(rng);
    cfg.learning_rate = trial % 2 == 0 ? 0.05 : 2.0;
    const double before = mean_ratio_gap(ScrlPolicy::default_policy(), corpus, cfg.target_ratio, m);
    const auto trained = train_scrl_policy(corpus, cfg, m);
    CHECK(mean_ratio_gap(trained, corpus, cfg.target_ratio, m) <= before);
  }
}

TEST_CASE("scrl training rejects bad configurations") {
  const auto m = test::english_model();
  ScrlTrainingConfig cfg;
  CHECK_THROWS_AS(train_scrl_policy({}, cfg, m), ParameterError);
  const auto corpus = training_corpus();
  cfg.learning_rate = -0.1;
  CHECK_THROWS_AS(train_scrl_policy(corpus, cfg, m), ParameterError);
  cfg.learning_rate = 0.1;
  cfg.steps = 0;
  CHECK_THROWS_AS(train_scrl_policy(corpus, cfg, m), ParameterError);
}

// ---- KiS ------------------------------------------------------------------

namespace {

const std::string kToySource = "alpha beta gamma delta epsilon zeta eta theta iota kappa";

NgramModel toy_uniform() { return NgramModel::uniform(toks(kToySource)); }

}  // namespace

TEST_CASE("kis returns the highest-reward candidate") {
  // Only simplicity counts; at ratio 0 candidates of 3, 7 and 5 tokens out of
  // 10 score 0.3, 0.7 and 0.5.
  const test::FixedGenerator gen({"alpha beta gamma", "alpha beta gamma delta epsilon zeta eta",
                                  "alpha beta gamma delta epsilon"});
  auto req = request(CompressorKind::KiS, kToySource, 0.0);
  req.options.fluency_weight = 0.0;
  req.options.salience_weight = 0.0;
  req.options.simplicity_weight = 1.0;
  const auto r = compress_kis(req, gen, toy_uniform());
  CHECK(r.compressed == "alpha beta gamma delta epsilon zeta eta");
  CHECK(gen.last_request.target_tokens == 10);
  CHECK(gen.last_request.n == 4);
}

TEST_CASE("kis simplicity is 1 for the source itself at ratio 0") {
  const auto m = toy_uniform();
  const auto src = tokenize(kToySource);
  const std::vector<std::string> keywords{"alpha", "beta"};
  const auto reward = kis_reward(src, src.size(), keywords, 0.0, m, {});
  CHECK(reward.simplicity == 1.0);
  CHECK(reward.salience == 1.0);
  // Uniform over 11 symbols.
  CHECK(reward.fluency == doctest::Approx(1.0 / 11.0));
}

TEST_CASE("kis prefers the keyword-preserving candidate") {
  const auto m = toy_uniform();
  const auto src = tokenize(kToySource);
  const std::vector<double> flat(src.size(), std::log2(11.0));
  const auto keywords = salient_keywords(src, flat);
  CHECK(keywords == std::vector<std::string>{"alpha", "beta"});

  const test::FixedGenerator gen({"zeta eta gamma delta epsilon", "alpha beta gamma delta epsilon"});
  const auto r = compress_kis(request(CompressorKind::KiS, kToySource, 0.5), gen, m);
  CHECK(r.compressed == "alpha beta gamma delta epsilon");

  // Same fluency and simplicity; salience differs by 1, weighted 0.5.
  const CompressorOptions defaults;
  const auto with = kis_reward(tokenize("alpha beta gamma delta epsilon"), 10, keywords, 0.5, m, defaults);
  const auto without = kis_reward(tokenize("zeta eta gamma delta epsilon"), 10, keywords, 0.5, m, defaults);
  CHECK(with.combined - without.combined == doctest::Approx(0.5));
}

TEST_CASE("kis with no usable candidates is an upstream error") {
  const test::FixedGenerator gen({"", kToySource + " lambda"});
  CHECK_THROWS_AS(compress_kis(request(CompressorKind::KiS, kToySource, 0.5), gen, toy_uniform()),
                  UpstreamError);
}

TEST_CASE("kis max_length gate") {
  const test::FixedGenerator gen({"alpha"});
  auto req = request(CompressorKind::KiS, kToySource, 0.5);
  req.max_length = 9;
  CHECK_THROWS_AS(compress_kis(req, gen, toy_uniform()), ParameterError);
  req.max_length = 10;
  CHECK_NOTHROW(compress_kis(req, gen, toy_uniform()));
}

TEST_CASE("chat generator request body") {
  net::EndpointConfig cfg;
  cfg.base_url = "http://scripted/v1";
  cfg.model = "gen";
  const nlohmann::json reply = {{"choices", {{{"message", {{"content", "one"}}}}, {{"message", {{"content", "two"}}}}}}};
  auto transport = std::make_shared<test::ScriptedTransport>(std::vector{test::json_reply(reply)});
  const ChatGenerator gen(cfg, transport);
  GenerationRequest g{"some source text", 2, 2, 0.3, 9};
  CHECK(gen.generate(g) == std::vector<std::string>{"one", "two"});
  const auto body = nlohmann::json::parse(transport->requests.at(0).second);
  CHECK(body["n"] == 2);
  CHECK(body["temperature"] == 0.3);
  CHECK(body["seed"] == 9);
  CHECK(body["model"] == "gen");
}

// ---- dispatch -------------------------------------------------------------

TEST_CASE("compress dispatches and checks backends") {
  Backends b;
  CHECK_THROWS_AS(compress(request(CompressorKind::Lingua, "a b", 0.0), b), ConfigError);
  b.scorer = std::make_shared<NgramModel>(test::english_model());
  CHECK(compress(request(CompressorKind::Lingua, "a b", 0.0), b).compressed == "a b");
  CHECK_THROWS_AS(compress(request(CompressorKind::KiS, "a b", 0.0), b), ConfigError);
  CHECK_THROWS_AS(compress(request(CompressorKind::SCRL, "a b", 1.0), b), ParameterError);

  const auto infos = describe_compressors(b);
  REQUIRE(infos.size() == 5);
  for (const auto& info : infos) {
    CHECK(info.available == (info.kind != CompressorKind::KiS));
    if (!info.available) CHECK_FALSE(info.reason.empty());
  }
}

TEST_CASE("options_from_json") {
  const auto o = options_from_json({{"granularity", "sentence"}, {"segment_size", 8}, {"include_question", true}});
  CHECK(o.granularity == Granularity::Sentence);
  CHECK(o.segment_size == 8);
  CHECK(o.include_question);
  CHECK_THROWS_AS(options_from_json({{"bogus", 1}}), ParameterError);
  CHECK_THROWS_AS(options_from_json({{"granularity", "word"}}), ParameterError);
}

// ---- properties -----------------------------------------------------------

namespace {

CompressionResult run_extractive(CompressorKind kind, const CompressionRequest& req, const Scorer& s) {
  switch (kind) {
    case CompressorKind::SelectiveContext: return compress_selective_context(req, s);
    case CompressorKind::Lingua: return compress_lingua(req, s);
    case CompressorKind::LongLingua: return compress_long_lingua(req, s);
    default: return compress_scrl(req, ScrlPolicy::default_policy(), s);
  }
}

}  // namespace

TEST_CASE("property: extractive outputs are subsequences hitting the token budget") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> ratio(0.0, 0.95);
  const auto m = test::english_model(2);
  for (auto kind : {CompressorKind::SelectiveContext, CompressorKind::Lingua, CompressorKind::SCRL}) {
    for (int trial = 0; trial < 60; ++trial) {
      auto req = request(kind, test::random_text(rng, 1, 60, true), ratio(rng));
      req.options.granularity = static_cast<Granularity>(trial % 3);
      const auto source = tokenize(req.text);
      const auto r = run_extractive(kind, req, m);
      const auto out = tokenize(r.compressed).tokens();
      CHECK(test::is_subsequence(out, source.tokens()));
      CHECK(out == kept_tokens(r));
      CHECK(r.original_len == source.size());
      CHECK(r.compressed_len == keep_count(req.ratio, source.size()));
      CHECK(r.achieved_ratio == compute_ratio(r.original_len, r.compressed_len));
      CHECK(std::abs(r.achieved_ratio - req.ratio) <= 1.0 / static_cast<double>(source.size()) + 1e-12);
    }
  }
}

TEST_CASE("property: long lingua output is a per-document subsequence") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> ratio(0.0, 0.9);
  const auto m = test::english_model(1);
  for (int trial = 0; trial < 60; ++trial) {
    auto req = request(CompressorKind::LongLingua, test::random_text(rng, 4, 50, true), ratio(rng));
    req.question = test::random_text(rng, 1, 6);
    const auto r = compress_long_lingua(req, m);
    const auto docs = split_blocks(req.text);
    const auto out_docs = split_blocks(r.compressed);
    INFO(req.text, "\n=>\n", r.compressed);
    CHECK(out_docs.size() <= docs.size());
    std::multiset<std::vector<std::string>> sources;
    for (const auto& d : docs) sources.insert(tokenize(req.text.substr(d.start, d.end - d.start)).tokens());
    for (const auto& d : out_docs) {
      const auto piece = tokenize(r.compressed.substr(d.start, d.end - d.start)).tokens();
      CHECK(std::any_of(sources.begin(), sources.end(),
                        [&](const auto& s) { return test::is_subsequence(piece, s); }));
    }
    CHECK(r.compressed_len == keep_count(req.ratio, r.original_len));
  }
}

TEST_CASE("property: ratio 0 is the identity for extractive compressors") {
  std::mt19937_64 rng(33);
  const auto m = test::english_model(2);
  for (auto kind : {CompressorKind::SelectiveContext, CompressorKind::Lingua, CompressorKind::LongLingua,
                    CompressorKind::SCRL}) {
    for (int trial = 0; trial < 30; ++trial) {
      const auto text = test::random_text(rng, 1, 40, kind != CompressorKind::LongLingua);
      const auto r = run_extractive(kind, request(kind, text, 0.0), m);
      CHECK(r.compressed == text);
      CHECK(r.achieved_ratio == 0.0);
    }
  }
}

TEST_CASE("property: scaling self-information leaves selections unchanged") {
  std::mt19937_64 rng(34);
  std::uniform_real_distribution<double> ratio(0.05, 0.9);
  const auto m = test::english_model(2);
  for (int trial = 0; trial < 40; ++trial) {
    const auto text = test::random_text(rng, 2, 50, true);
    const double rho = ratio(rng);
    for (auto kind : {CompressorKind::SelectiveContext, CompressorKind::Lingua}) {
      const auto base = kept_positions(run_extractive(kind, request(kind, text, rho), m));
      for (double c : {0.5, 3.0, 100.0}) {
        const test::ScaledScorer scaled(m, c);
        CHECK(kept_positions(run_extractive(kind, request(kind, text, rho), scaled)) == base);
      }
    }
  }
}

TEST_CASE("property: budgets are conserved") {
  std::mt19937_64 rng(35);
  std::uniform_int_distribution<std::size_t> len(0, 200);
  std::uniform_real_distribution<double> floor(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const SegmentLengths s{len(rng), len(rng), len(rng)};
    const std::size_t total = s.instruction + s.context + s.question;
    if (total == 0) continue;
    const std::size_t target = std::uniform_int_distribution<std::size_t>(1, total)(rng);
    const auto b = allocate_budget(target, s, floor(rng), floor(rng));
    CHECK(b.instruction_tokens + b.question_tokens + b.context_tokens == b.total_tokens);
    CHECK(b.instruction_tokens <= s.instruction);
    CHECK(b.question_tokens <= s.question);
    CHECK(b.context_tokens <= s.context);
    CHECK(b.overshoot == (b.total_tokens > target));
  }
}

TEST_CASE("property: rank_documents is a permutation and rank budgets sum exactly") {
  std::mt19937_64 rng(36);
  const auto m = test::english_model(1);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + trial % 6;
    std::vector<std::string> docs;
    std::vector<std::size_t> lengths;
    for (std::size_t i = 0; i < n; ++i) {
      docs.push_back(test::random_text(rng, 1, 12));
      lengths.push_back(tokenize(docs.back()).size());
    }
    auto order = rank_documents(test::random_text(rng, 1, 5), docs, m);
    std::sort(order.begin(), order.end());
    std::vector<std::size_t> identity(n);
    std::iota(identity.begin(), identity.end(), 0);
    CHECK(order == identity);

    const std::size_t total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
    const std::size_t budget = std::uniform_int_distribution<std::size_t>(0, total)(rng);
    const auto shares = linear_rank_budgets(budget, lengths);
    CHECK(std::accumulate(shares.begin(), shares.end(), std::size_t{0}) == budget);
    for (std::size_t i = 0; i < n; ++i) CHECK(shares[i] <= lengths[i]);
  }
}

TEST_CASE("property: compressors are deterministic") {
  std::mt19937_64 rng(37);
  const auto m = test::english_model(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto text = test::random_text(rng, 1, 40, true);
    for (auto kind : {CompressorKind::SelectiveContext, CompressorKind::Lingua, CompressorKind::SCRL}) {
      const auto a = run_extractive(kind, request(kind, text, 0.4), m);
      const auto b = run_extractive(kind, request(kind, text, 0.4), m);
      CHECK(a.compressed == b.compressed);
      CHECK(a.trace == b.trace);
    }
  }
}
