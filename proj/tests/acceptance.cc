// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "relcnn/cli.h"
#include "relcnn/evaluation.h"
#include "relcnn/features.h"
#include "relcnn/metrics.h"
#include "relcnn/network.h"
#include "relcnn/optimizer.h"
#include "relcnn/synthetic.h"
#include "relcnn/trainer.h"
#include "test_util.h"

using namespace relcnn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

Outcome gradient_check() {
  auto t0 = std::chrono::steady_clock::now();
  VocabularySet v = testing::small_vocabularies(30);
  double worst = 0.0;
  std::size_t checked = 0, small = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ModelParams p = testing::random_model(v, {2, 3}, 3, seed * 101);
    Rng rng(seed);
    auto inst = testing::random_instance(v, 7, static_cast<int>(seed % 6), rng);
    std::vector<double> ones(p.pooled_size(), 1.0);
    auto mask = apply_dropout(ones, 0.5, Mode::kTrain, rng).mask;
    auto gc = testing::gradient_check(inst, p, mask, 1e-5, 1e-8);
    worst = std::max(worst, gc.max_rel_error);
    checked += gc.checked;
    small += gc.skipped_small;
  }
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << "max rel error " << fmt("%.3g", worst) << " over " << checked
    << " entries (" << small << " with |g| < 1e-8), " << fmt("%.2f", secs)
    << " s";
  return {worst < 1e-4 && secs < 10.0, d.str()};
}

Outcome padding_inertness() {
  VocabularySet v = testing::small_vocabularies(30);
  ModelParams p = testing::random_model(v, {2, 3, 4, 6}, 5, 17);
  Rng rng(99);
  int identical = 0;
  for (int i = 0; i < 100; ++i) {
    int m = 1 + static_cast<int>(uniform_index(rng, 12));
    auto inst = testing::random_instance(v, m, 0, rng);
    auto base = forward(inst, p, Mode::kEval, rng).logits;
    int extra = 1 + static_cast<int>(uniform_index(rng, 10));
    inst.features.resize(m + extra, pad_token(v));
    auto padded = forward(inst, p, Mode::kEval, rng).logits;
    if (padded == base) ++identical;
  }
  return {identical == 100, std::to_string(identical) + "/100 bitwise equal"};
}

Outcome softmax_properties() {
  Rng rng(5);
  double sum_err = 0, loss_err = 0, shift_err = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> o(kNumClasses);
    double spread = trial % 2 ? 50.0 : 3.0;
    for (double& x : o) x = uniform(rng, -spread, spread);
    int y = static_cast<int>(uniform_index(rng, kNumClasses));
    auto p = softmax(o);
    double sum = 0;
    for (double q : p) sum += q;
    sum_err = std::max(sum_err, std::abs(sum - 1.0));
    auto sl = softmax_loss(o, y);
    if (p[y] > 1e-300) {
      loss_err = std::max(loss_err, std::abs(sl.loss + std::log(p[y])) /
                                        std::max(1.0, sl.loss));
    }
    double shift = uniform(rng, -100, 100);
    std::vector<double> shifted = o;
    for (double& x : shifted) x += shift;
    auto ps = softmax(shifted);
    for (int k = 0; k < kNumClasses; ++k)
      shift_err = std::max(shift_err, std::abs(ps[k] - p[k]));
    shift_err = std::max(shift_err,
                         std::abs(softmax_loss(shifted, y).loss - sl.loss) /
                             std::max(1.0, sl.loss));
  }
  std::ostringstream d;
  d << "sum err " << fmt("%.2g", sum_err) << ", loss err "
    << fmt("%.2g", loss_err) << ", shift err " << fmt("%.2g", shift_err);
  return {sum_err <= 1e-9 && loss_err <= 1e-12 && shift_err <= 1e-12, d.str()};
}

Outcome adam_oracle() {
  // f(theta) = 0.5 * a * (theta - b)^2
  const double a = 3.0, b = 0.7;
  std::vector<double> theta = {-1.2}, m = {0.0}, v = {0.0};
  double ref = -1.2, rm = 0.0, rv = 0.0;
  const AdamConfig cfg;
  double err = 0.0;
  for (int t = 1; t <= 3; ++t) {
    std::vector<double> g = {a * (theta[0] - b)};
    adam_update(theta, g, m, v, cfg, t);
    double rg = a * (ref - b);
    rm = cfg.beta1 * rm + (1 - cfg.beta1) * rg;
    rv = cfg.beta2 * rv + (1 - cfg.beta2) * rg * rg;
    double mhat = rm / (1 - std::pow(cfg.beta1, t));
    double vhat = rv / (1 - std::pow(cfg.beta2, t));
    ref -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    err = std::max(err, std::abs(theta[0] - ref));
  }
  std::vector<double> z = {0.25, -4.0}, zg = {0.0, 0.0}, zm(2), zv(2);
  adam_update(z, zg, zm, zv, cfg, 1);
  bool unchanged = z == std::vector<double>{0.25, -4.0};
  return {err <= 1e-12 && unchanged,
          "max deviation " + fmt("%.2g", err) +
              (unchanged ? ", zero gradient inert" : ", zero gradient moved")};
}

Outcome overfit() {
  auto t0 = std::chrono::steady_clock::now();
  SyntheticOptions opt;
  opt.sentences = 20;
  opt.seed = 8;
  Dataset data(generate_synthetic_corpus(opt));
  std::vector<std::size_t> all(data.instances().size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto pairs = data.pairs(all);
  VocabularySet vocabs = build_vocabularies(pairs);
  std::vector<EncodedInstance> enc;
  for (const auto& pr : pairs)
    enc.push_back(encode_instance(*pr.sentence, *pr.instance, vocabs));

  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 8;
  ModelParams init =
      init_model(make_embedding_set(vocabs, {}, 8), cfg.network, 9);
  TrainResult r = train(cfg, std::move(init), enc);
  auto preds = predict_batch(r.model, enc);
  int correct = 0;
  for (std::size_t i = 0; i < enc.size(); ++i)
    correct += preds[i].label == enc[i].label_id;
  double secs = seconds_since(t0);
  std::ostringstream d;
  d << correct << "/" << enc.size() << " correct after 200 epochs, "
    << fmt("%.2f", secs) << " s";
  return {enc.size() == 20 && correct == 20 && secs < 30.0, d.str()};
}

struct EndToEnd {
  std::vector<double> cnn_f1;
  std::vector<double> svm_f1;
  std::vector<CvResult> cnn;
  double secs = 0;
};

EndToEnd run_end_to_end() {
  EndToEnd e;
  auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t seed : {1, 2}) {
    SyntheticOptions opt;
    opt.sentences = 2500;
    opt.seed = seed;
    Dataset data(generate_synthetic_corpus(opt));
    ExperimentConfig cfg;
    cfg.train.seed = seed;
    CvResult r = cross_validate(data, cfg);
    e.cnn_f1.push_back(r.mean.macro.f1);
    e.cnn.push_back(std::move(r));
    SvmExperiment svm;
    svm.seed = seed;
    svm.costs = {0.1};
    e.svm_f1.push_back(svm_cross_validate(data, svm).front().mean.macro.f1);
  }
  e.secs = seconds_since(t0);
  return e;
}

Outcome synthetic_end_to_end(const EndToEnd& e) {
  double mean = 0;
  bool each = true, svm = true;
  std::ostringstream d;
  d << "CNN macro-F1";
  for (double f : e.cnn_f1) {
    mean += f / e.cnn_f1.size();
    each = each && f >= 93.0;
    d << " " << format_percent(f);
  }
  d << " (mean " << format_percent(mean) << "); SVM macro-F1";
  for (double f : e.svm_f1) {
    svm = svm && f >= 85.0;
    d << " " << format_percent(f);
  }
  d << "; " << fmt("%.1f", e.secs) << " s";
  return {each && mean >= 95.0 && svm && e.secs < 300.0, d.str()};
}

Outcome ablation_direction() {
  SyntheticOptions opt;
  opt.sentences = 800;
  opt.entities_per_sentence = 3;
  opt.seed = 5;
  Dataset data(generate_synthetic_corpus(opt));
  ExperimentConfig base;
  base.train.seed = 5;
  auto run = [&](FeatureMask mask) {
    ExperimentConfig cfg = base;
    cfg.embeddings.enabled = mask;
    return cross_validate(data, cfg).mean.macro.f1;
  };
  double rv_t = run({true, false, false, false, false, true});
  double with_pos = run({true, true, true, false, false, true});
  std::ostringstream d;
  d << "RV + T " << format_percent(rv_t) << " -> RV + T + (P1+P2) "
    << format_percent(with_pos) << " (+" << format_percent(with_pos - rv_t)
    << ")";
  return {with_pos - rv_t >= 5.0, d.str()};
}

Outcome position_encoding() {
  Sentence s = testing::lexix_sentence();
  auto inst = generate_instances(s, s.relations);
  std::vector<SentencePair> pairs = {{&s, &inst[0]}};
  VocabularySet v = build_vocabularies(pairs);
  EncodedInstance e = encode_instance(s, inst[0], v);
  const auto& p1 = v[FeatureKind::kPos1];
  bool ok = e.features[0].p1 == -3 && e.features[5].p1 == 2 &&
            e.features[0].id(FeatureKind::kPos1) == p1.lookup("-3") &&
            e.features[5].id(FeatureKind::kPos1) == p1.lookup("2");
  for (int t = 3; t <= 3; ++t) ok = ok && e.features[t].p1 == 0;
  for (int t = 8; t <= 10; ++t) ok = ok && e.features[t].p2 == 0;
  std::ostringstream d;
  d << "He " << e.features[0].p1 << ", prevent " << e.features[5].p1
    << ", Lexix " << e.features[3].p1 << ", heart (P2) " << e.features[9].p2;
  return {ok, d.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cv_determinism() {
  fs::path dir = fs::temp_directory_path() / "relcnn_acceptance_cv";
  fs::remove_all(dir);
  std::ostringstream sink;
  auto cli = [&](std::vector<std::string> args) {
    return run_cli(args, sink, sink);
  };
  if (cli({"synth", "--out", (dir / "data").string(), "--sentences", "300",
           "--entities", "3", "--seed", "6"}) != kExitOk)
    return {false, "synth failed"};
  std::vector<std::string> base = {"cv", "--corpus",
                                   (dir / "data" / "corpus.jsonl").string(),
                                   "--epochs", "3", "--seed", "6", "--out"};
  for (const char* run : {"a", "b"}) {
    auto args = base;
    args.push_back((dir / run).string());
    if (cli(args) != kExitOk) return {false, "cv failed: " + sink.str()};
  }
  int same = 0, total = 0;
  for (const char* f : {"cv_report.tsv", "cv_report.json", "cv_table.txt"}) {
    ++total;
    std::string a = slurp(dir / "a" / f);
    if (!a.empty() && a == slurp(dir / "b" / f)) ++same;
  }
  fs::remove_all(dir);
  return {same == total,
          std::to_string(same) + "/" + std::to_string(total) +
              " report files byte-identical"};
}

Outcome cv_bookkeeping(const EndToEnd& e) {
  bool ok = true;
  double worst = 0.0;
  int worst_spread = 0;
  SyntheticOptions opt;
  opt.sentences = 2500;
  opt.seed = 1;
  Dataset data(generate_synthetic_corpus(opt));
  const CvResult& r = e.cnn.front();
  const auto& inst = data.instances();
  std::vector<int> seen(inst.size(), 0);
  for (int f = 0; f < r.split.k; ++f) {
    for (auto i : r.split.test_indices(f)) ++seen[i];
  }
  for (int s : seen) ok = ok && s == 1;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<int> per_fold(r.split.k, 0);
    for (std::size_t i = 0; i < inst.size(); ++i)
      if (label_id(inst[i].label) == c) ++per_fold[r.split.assignments[i]];
    int spread = *std::max_element(per_fold.begin(), per_fold.end()) -
                 *std::min_element(per_fold.begin(), per_fold.end());
    worst_spread = std::max(worst_spread, spread);
  }
  for (const auto& res : e.cnn) {
    auto mean_of = [&](auto field) {
      double s = 0;
      for (const auto& f : res.folds) s += field(f);
      return s / res.folds.size();
    };
    auto check = [&](double avg, double expect) {
      worst = std::max(worst, std::abs(avg - expect));
    };
    check(res.mean.macro.f1, mean_of([](auto& f) { return f.macro.f1; }));
    check(res.mean.macro.precision,
          mean_of([](auto& f) { return f.macro.precision; }));
    check(res.mean.micro.recall, mean_of([](auto& f) { return f.micro.recall; }));
    for (int c = 0; c < kNumClasses; ++c)
      check(res.mean.per_class[c].f1,
            mean_of([c](auto& f) { return f.per_class[c].f1; }));
  }
  std::ostringstream d;
  d << (ok ? "every instance tested once" : "instance coverage broken")
    << ", max per-class fold spread " << worst_spread << ", mean deviation "
    << fmt("%.2g", worst);
  return {ok && worst_spread <= 1 && worst <= 1e-12, d.str()};
}

Outcome metrics_oracle() {
  const std::vector<int> gold = {0, 0, 0, 1, 1, 5, 5, 5, 2, 3};
  const std::vector<int> pred = {0, 0, 5, 1, 0, 5, 1, 5, 2, 2};
  MetricsReport r = compute_metrics(gold, pred);
  bool ok = true;
  double sp = 0, sr = 0, sf = 0;
  int present = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    long tp = 0, fp = 0, fn = 0, sup = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
      tp += gold[i] == c && pred[i] == c;
      fp += gold[i] != c && pred[i] == c;
      fn += gold[i] == c && pred[i] != c;
      sup += gold[i] == c;
    }
    double p = tp + fp ? 100.0 * tp / (tp + fp) : 0.0;
    double rc = tp + fn ? 100.0 * tp / (tp + fn) : 0.0;
    double f = p + rc > 0 ? 2 * p * rc / (p + rc) : 0.0;
    ok = ok && r.per_class[c].precision == p && r.per_class[c].recall == rc &&
         r.per_class[c].f1 == f;
    if (c != kNoRelationId && sup > 0) {
      ++present;
      sp += p;
      sr += rc;
      sf += f;
    }
  }
  ok = ok && r.macro.precision == sp / present && r.macro.recall == sr / present &&
       r.macro.f1 == sf / present;

  CvResult res;
  res.name = "[4,6]";
  res.mean = r;
  std::vector<CvResult> results = {res};
  std::ostringstream table;
  write_summary_table(results, "Filter lengths", table);
  bool rendered = table.str() ==
                  "Filter lengths\tPrecision\tRecall\tF Score\n"
                  "[4,6]\t41.67\t54.17\t45.83\n";
  std::string row = table.str().substr(table.str().find('\n') + 1);
  row.pop_back();
  return {ok && rendered, "macro row: " + row};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("%s [%d] %s: %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  };
  auto guarded = [](const std::function<Outcome()>& f) {
    try {
      return f();
    } catch (const std::exception& e) {
      return Outcome{false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "gradient correctness", guarded(gradient_check));
  report(2, "padding inertness", guarded(padding_inertness));
  report(3, "softmax normalization", guarded(softmax_properties));
  report(4, "Adam oracle", guarded(adam_oracle));
  report(5, "overfit 20 instances", guarded(overfit));
  EndToEnd e;
  Outcome e2e = guarded([&] {
    e = run_end_to_end();
    return synthetic_end_to_end(e);
  });
  report(6, "synthetic end-to-end", e2e);
  report(7, "ablation direction", guarded(ablation_direction));
  report(8, "position encoding", guarded(position_encoding));
  report(9, "cv determinism", guarded(cv_determinism));
  report(10, "cv bookkeeping", guarded([&] {
           if (e.cnn.empty()) return Outcome{false, "end-to-end run missing"};
           return cv_bookkeeping(e);
         }));
  report(11, "metrics oracle", guarded(metrics_oracle));
  std::printf("%d/11 criteria passed\n", 11 - failures);
  return failures == 0 ? 0 : 1;
}
