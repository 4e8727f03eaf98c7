// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria 4, 7b, 8b and 9 share a single desk-scale SDE pipeline
// run; everything else is self-contained.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "genformer/baseline.hpp"
#include "genformer/dataset.hpp"
#include "genformer/io.hpp"
#include "genformer/markov.hpp"
#include "genformer/metrics.hpp"
#include "genformer/pipeline.hpp"
#include "genformer/postprocess.hpp"
#include "genformer/sdebench.hpp"
#include "genformer/seq2seq.hpp"
#include "genformer/special.hpp"
#include "genformer/stategen.hpp"

#include "gradcheck.hpp"

namespace fs = std::filesystem;
using namespace genformer;
using nn::Tape;
using nn::Tensor;

namespace {

int g_failures = 0;

double now_seconds() {
  static const auto start = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int criterion, bool pass, const std::string& what, const std::string& detail) {
  std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", criterion, what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Tensor random_tensor(int r, int c, Rng& rng, double scale = 1.0) {
  Tensor t(r, c);
  for (double& v : t.v) v = scale * rng.normal();
  return t;
}

// ---------------------------------------------------------------------------
// criterion 1: gradient correctness at h = 1e-5, relative tolerance 1e-4

void criterion_1() {
  const double t0 = now_seconds();
  double worst = 0.0;
  std::string worst_at;
  auto track = [&](const char* name, const testutil::GradCheckReport& rep) {
    if (rep.worst_violation > worst) {
      worst = rep.worst_violation;
      worst_at = std::string(name) + "/" + rep.worst_param;
    }
  };
  Rng rng(1001);

  {  // every individual layer type
    nn::ParamStore store;
    store.create("w", 4, 3).value = random_tensor(4, 3, rng);
    store.create("b", 4, 1).value = random_tensor(4, 1, rng);
    Tensor z = random_tensor(3, 5, rng);
    track("linear", testutil::grad_check(store, [&](Tape& t) {
      int out = t.add_colvec(t.matmul(t.leaf(store.get("w")), t.constant(z)),
                             t.leaf(store.get("b")));
      return t.l2_loss(out, Tensor::full(4, 5, 0.3));
    }));
  }
  {
    nn::ParamStore store;
    store.create("k", 5, 6).value = random_tensor(5, 6, rng);
    Tensor x = random_tensor(2, 9, rng);
    track("conv1d_circular", testutil::grad_check(store, [&](Tape& t) {
      return t.l2_loss(t.conv1d_circular(t.constant(x), t.leaf(store.get("k")), 3),
                       Tensor::full(5, 9, 0.1));
    }));
  }
  {
    nn::ParamStore store;
    store.create("gain", 6, 1).value = random_tensor(6, 1, rng);
    store.create("bias", 6, 1).value = random_tensor(6, 1, rng);
    Tensor z = random_tensor(6, 4, rng);
    track("layer_norm", testutil::grad_check(store, [&](Tape& t) {
      return t.l2_loss(
          t.layer_norm_cols(t.constant(z), t.leaf(store.get("gain")), t.leaf(store.get("bias"))),
          Tensor::full(6, 4, -0.2));
    }));
  }
  for (bool causal : {false, true}) {
    nn::ParamStore store;
    const int d = 8;
    for (const char* n : {"wq", "wk", "wv", "wo"})
      store.create(n, d, d).value = random_tensor(d, d, rng, 0.5);
    Tensor z = random_tensor(d, 5, rng);
    track(causal ? "self_attention_causal" : "self_attention",
          testutil::grad_check(store, [&](Tape& t) {
            nn::AttnNodes w{t.leaf(store.get("wq")), t.leaf(store.get("wk")),
                            t.leaf(store.get("wv")), t.leaf(store.get("wo"))};
            return t.l2_loss(nn::self_attention(t, t.constant(z), w, 2, causal),
                             Tensor::full(d, 5, 0.25));
          }));
  }
  {
    nn::ParamStore store;
    const int d = 8;
    for (const char* n : {"wq", "wk", "wv", "wo"})
      store.create(n, d, d).value = random_tensor(d, d, rng, 0.5);
    Tensor z_dec = random_tensor(d, 3, rng);
    Tensor z_enc = random_tensor(d, 6, rng);
    track("cross_attention", testutil::grad_check(store, [&](Tape& t) {
      nn::AttnNodes w{t.leaf(store.get("wq")), t.leaf(store.get("wk")),
                      t.leaf(store.get("wv")), t.leaf(store.get("wo"))};
      return t.l2_loss(nn::cross_attention(t, t.constant(z_dec), t.constant(z_enc), w, 2),
                       Tensor::full(d, 3, 0.2));
    }));
  }
  {
    nn::ParamStore store;
    store.create("w1", 6, 4).value = random_tensor(6, 4, rng);
    store.create("b1", 6, 1).value = random_tensor(6, 1, rng);
    store.create("w2", 4, 6).value = random_tensor(4, 6, rng);
    store.create("b2", 4, 1).value = random_tensor(4, 1, rng);
    Tensor z = random_tensor(4, 3, rng);
    track("feed_forward", testutil::grad_check(store, [&](Tape& t) {
      nn::FfnNodes w{t.leaf(store.get("w1")), t.leaf(store.get("b1")),
                     t.leaf(store.get("w2")), t.leaf(store.get("b2"))};
      return t.l2_loss(nn::feed_forward(t, t.constant(z), w), Tensor::full(4, 3, 0.4));
    }));
  }
  {
    nn::ParamStore store;
    store.create("table", 6, 5).value = random_tensor(6, 5, rng);
    store.create("tw", 6, 4).value = random_tensor(6, 4, rng);
    store.create("proj", 4, 6).value = random_tensor(4, 6, rng);
    std::vector<CalendarStamp> cal;
    for (int h = 0; h < 3; ++h) cal.push_back({2012, 7, 14, h});
    auto stamps = TimeStampVector::from_calendar(cal);
    track("embeddings_focal", testutil::grad_check(store, [&](Tape& t) {
      int e = nn::markov_state_embedding(t, t.leaf(store.get("table")), {0, 4, 2});
      int tf = t.matmul(t.leaf(store.get("tw")),
                        t.constant(nn::calendar_features(stamps, 2006, 2021)));
      int probs = t.softmax_cols(
          t.matmul(t.leaf(store.get("proj")), t.slice_cols(t.add(e, tf), 2, 3)));
      return t.focal_loss(probs, 2, 2.0, 1.3);
    }));
  }
  {
    nn::ParamStore store;
    store.create("w", 5, 5).value = random_tensor(5, 5, rng);
    Tensor z = random_tensor(5, 4, rng);
    track("dropout", testutil::grad_check(store, [&](Tape& t) {
      Rng mask_rng(2024);
      int out = t.dropout(t.matmul(t.leaf(store.get("w")), t.constant(z)), 0.3, &mask_rng, true);
      return t.l2_loss(out, Tensor::full(5, 4, 0.15));
    }));
  }

  {  // assembled seq2seq model, d_model 8, n_head 2
    HyperParams hp;
    hp.q_enc_in = 6;
    hp.q_dec_in = 3;
    hp.q_out = 3;
    hp.n_clusters = 4;
    hp.d_model = 8;
    hp.d_ff = 16;
    hp.n_head = 2;
    hp.n_enc = 1;
    hp.n_dec = 1;
    hp.dropout_rate = 0.05;
    GenFormerModel model(2, StampKind::Unitless, hp, 42);
    WindowPair w;
    w.m = 2;
    w.q_enc = 6;
    w.q_out = 3;
    w.enc_x.resize(12);
    for (double& v : w.enc_x) v = rng.normal();
    for (int j = 0; j < 6; ++j) w.enc_y.push_back(static_cast<int>(rng.index(4)));
    for (int j = 0; j < 3; ++j) w.out_y.push_back(static_cast<int>(rng.index(4)));
    w.enc_t = TimeStampVector::uniform(0.0, 1.0, 6);
    w.out_t = TimeStampVector::uniform(6.0, 1.0, 3);
    w.target_x.assign(6, 0.0);
    Tensor pred = model.predict(w);
    for (std::size_t i = 0; i < w.target_x.size(); ++i) w.target_x[i] = pred.v[i] + 0.8;
    track("genformer_model", testutil::grad_check(model.params(), [&](Tape& t) {
      Rng mask_rng(5150);
      return model.loss_graph(t, w, true, &mask_rng);
    }));
  }
  {  // assembled decoder-only state generator
    HyperParams hp;
    hp.markov_order = 3;
    hp.d_model = 8;
    hp.d_ff = 16;
    hp.n_head = 2;
    hp.n_markov = 1;
    hp.dropout_rate = 0.05;
    StateGenModel model(4, StampKind::Unitless, hp, 43);
    track("stategen_model", testutil::grad_check(model.params(), [&](Tape& t) {
      Rng mask_rng(6160);
      int probs = model.forward_graph(t, {0, 2, 1}, TimeStampVector::uniform(0.0, 1.0, 4), true,
                                      &mask_rng);
      return t.focal_loss(probs, 3, 2.0, 1.3);
    }));
  }

  const double elapsed = now_seconds() - t0;
  bool pass = worst <= 1.0 && elapsed < 120.0;
  report(1, pass, "gradient correctness vs central finite differences",
         fmt("worst tolerance ratio %.3f at %s, %.1f s", worst, worst_at.c_str(), elapsed));
}

// ---------------------------------------------------------------------------
// criterion 2: reshuffling golden example

void criterion_2() {
  TimeSeriesMatrix series(2, 5, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, 5));
  const double u1[] = {2.14, 6.36, 0.64, 4.05, 1.31};
  const double u2[] = {0.51, 3.24, 2.46, 0.60, 2.00};
  for (int j = 0; j < 5; ++j) {
    series.at(0, j) = u1[j];
    series.at(1, j) = u2[j];
  }
  auto out = reshuffle_with_samples(series, {{4.68, 4.34, 2.58, 1.76, 1.26},
                                             {5.53, 5.27, 4.34, 2.75, 1.52}});
  const std::vector<double> want1 = {2.58, 4.68, 1.26, 4.34, 1.76};
  const std::vector<double> want2 = {1.52, 5.53, 5.27, 2.75, 4.34};
  bool pass = std::vector<double>(out.row(0), out.row(0) + 5) == want1 &&
              std::vector<double>(out.row(1), out.row(1) + 5) == want2;
  report(2, pass, "reshuffling reproduces the 2-station worked example exactly",
         pass ? "both rows bitwise equal" : "row mismatch");
}

// ---------------------------------------------------------------------------
// criterion 3: Cholesky correction exactness and reshuffle stability

void criterion_3() {
  const int n = 100000;
  Rng rng(3001);
  TimeSeriesMatrix series(3, n, Space::Gaussian, TimeStampVector::uniform(0.0, 1.0, n));
  for (double& v : series.data) v = rng.normal();

  CorrelationMatrix target(3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) target.at(i, j) = i == j ? 1.0 : 0.5;

  auto corrected = correlation_correct(series, target);
  double err_corr = frobenius_rel_error(target, spatial_correlation(corrected));

  auto shuffled = reshuffle(corrected, MarginalModel::standard_gaussian(), 3002);
  double err_shuf = frobenius_rel_error(target, spatial_correlation(shuffled));

  // a second random PSD target exercises the generic path
  CorrelationMatrix target2(3);
  {
    std::vector<double> a(9);
    for (double& v : a) v = rng.uniform(-1.0, 1.0);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double acc = i == j ? 0.25 : 0.0;
        for (int k = 0; k < 3; ++k) acc += a[i * 3 + k] * a[j * 3 + k];
        target2.at(i, j) = acc;
      }
  }
  double err_corr2 =
      frobenius_rel_error(target2, spatial_correlation(correlation_correct(series, target2)));

  bool pass = err_corr < 1e-8 && err_corr2 < 1e-8 && err_shuf < 0.05;
  report(3, pass, "Cholesky correction exact, reshuffle within 5% at n=1e5",
         fmt("corrected %.2e / %.2e, after reshuffle %.4f", err_corr, err_corr2, err_shuf));
}

// ---------------------------------------------------------------------------
// criterion 5: SDE oracle suite

void criterion_5() {
  const double t0 = now_seconds();
  SdeParams p;
  p.theta = 40.0;
  p.alpha = p.beta = 1.0;
  p.dt = 1e-3;
  p.m = 3;
  p.n_steps = 200;
  p.n_realizations = 500;
  p.seed = 5001;
  auto run = milstein_simulate(p);

  double q_mean = 0.0;
  std::int64_t q_count = 0;
  for (const auto& q : run.q) {
    for (double v : q.data) q_mean += v;
    q_count += static_cast<std::int64_t>(q.data.size());
  }
  q_mean /= static_cast<double>(q_count);

  std::vector<double> v1, v2, v3, ks_sample;
  for (const auto& q : run.q) {
    auto v = build_v(q);
    v1.insert(v1.end(), v.row(0), v.row(0) + v.n);
    v2.insert(v2.end(), v.row(1), v.row(1) + v.n);
    v3.insert(v3.end(), v.row(2), v.row(2) + v.n);
    ks_sample.push_back(v.at(0, 99));
    ks_sample.push_back(v.at(0, 199));
  }
  double c12 = pearson_correlation(v1, v2);
  double c13 = pearson_correlation(v1, v3);
  double c23 = pearson_correlation(v2, v3);
  double cross_err = std::max({std::abs(c12 - 0.5), std::abs(c13 - 0.5), std::abs(c23 - 0.5)});

  double ac_err = 0.0;
  for (int lag = 1; lag <= 25; ++lag) {
    double num = 0.0, den = 0.0;
    for (const auto& q : run.q) {
      const double* row = q.row(0);
      for (int j = 0; j + lag < q.n; ++j) num += (row[j] - 1.0) * (row[j + lag] - 1.0);
      for (int j = 0; j + lag < q.n; ++j) den += (row[j] - 1.0) * (row[j] - 1.0);
    }
    ac_err = std::max(ac_err, std::abs(num / den - oracle_autocorr(lag * p.dt, p)));
  }

  double d = ks_statistic(ks_sample,
                          [](double x) { return gamma_cdf(std::max(x, 0.0), 2.0, 1.0); });
  double d_crit = ks_critical_value(0.01, ks_sample.size());
  const double elapsed = now_seconds() - t0;

  bool pass = std::abs(q_mean - 1.0) < 0.05 && cross_err < 0.05 && ac_err < 0.05 && d < d_crit &&
              elapsed < 60.0;
  report(5, pass, "SDE oracle suite at 500 realizations x 200 steps",
         fmt("|mean-1|=%.4f, cross err %.4f, autocorr err %.4f, KS %.4f<%.4f, %.1f s",
             std::abs(q_mean - 1.0), cross_err, ac_err, d, d_crit, elapsed));
}

// ---------------------------------------------------------------------------
// criterion 6: Markov estimation oracle equivalence and re-estimation

void criterion_6() {
  Rng rng(6001);
  std::vector<MarkovStateSequence> seqs;
  for (int r = 0; r < 5; ++r) {
    MarkovStateSequence s;
    s.n_states = 4;
    for (int j = 0; j < 200; ++j) s.states.push_back(static_cast<int>(rng.index(4)));
    seqs.push_back(std::move(s));
  }
  auto tm = estimate_transition_matrix(seqs);
  std::map<std::pair<int, int>, std::int64_t> counts;
  std::map<int, std::int64_t> row_counts;
  for (const auto& s : seqs)
    for (std::size_t j = 1; j < s.states.size(); ++j) {
      counts[{s.states[j - 1], s.states[j]}] += 1;
      row_counts[s.states[j - 1]] += 1;
    }
  bool exact = true;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      double want = row_counts[a] ? static_cast<double>(counts[{a, b}]) /
                                        static_cast<double>(row_counts[a])
                                  : tm.stationary[b];
      if (tm.prob(a, b) != want) exact = false;
    }

  TransitionMatrix truth;
  truth.n_states = 3;
  truth.probs = {0.2, 0.5, 0.3, 0.6, 0.2, 0.2, 0.1, 0.1, 0.8};
  truth.counts.assign(9, 0);
  truth.stationary = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  auto chain = simulate_chain(truth, 0, 100000, 6002);
  auto re = estimate_transition_matrix({chain});
  double worst_tv = 0.0;
  for (int a = 0; a < 3; ++a) {
    double tv = 0.0;
    for (int b = 0; b < 3; ++b) tv += std::abs(re.prob(a, b) - truth.prob(a, b));
    worst_tv = std::max(worst_tv, tv / 2.0);
  }

  bool pass = exact && worst_tv < 0.05;
  report(6, pass, "transition estimation equals counting, TV recovery at 1e5 steps",
         fmt("oracle equality %s, worst row TV %.4f", exact ? "exact" : "BROKEN", worst_tv));
}

// ---------------------------------------------------------------------------
// criterion 7a: state generator fidelity on an order-2 chain

MarkovStateSequence simulate_order2_source(int n, std::uint64_t seed) {
  // sticky diagonal plus an affine preferred-next rule; the pair process has a
  // clearly non-uniform stationary law
  Rng rng(seed);
  MarkovStateSequence seq;
  seq.n_states = 5;
  seq.states = {0, 1};
  auto sample = [&](int s1, int s2) {
    double u = rng.uniform01();
    if (s1 == s2) {
      if (u < 0.8) return s2;
      int others[4];
      int k = 0;
      for (int s = 0; s < 5; ++s)
        if (s != s2) others[k++] = s;
      return others[static_cast<int>((u - 0.8) / 0.05) % 4];
    }
    int preferred = (s1 + 2 * s2) % 5;
    if (u < 0.5) return preferred;
    int others[4];
    int k = 0;
    for (int s = 0; s < 5; ++s)
      if (s != preferred) others[k++] = s;
    return others[static_cast<int>((u - 0.5) / 0.125) % 4];
  };
  for (int j = 2; j < n; ++j)
    seq.states.push_back(sample(seq.states[j - 2], seq.states[j - 1]));
  return seq;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return 0.5 * acc;
}

std::vector<double> bigram_frequencies(const MarkovStateSequence& seq) {
  const int k = seq.n_states;
  std::vector<double> freq(static_cast<std::size_t>(k) * k, 0.0);
  for (std::size_t j = 1; j < seq.states.size(); ++j)
    freq[static_cast<std::size_t>(seq.states[j - 1]) * k + seq.states[j]] += 1.0;
  for (double& f : freq) f /= static_cast<double>(seq.states.size() - 1);
  return freq;
}

void criterion_7a(double& out_tv1, double& out_tv2) {
  const int n = 100000;
  auto source = simulate_order2_source(n, 7001);

  HyperParams hp;
  hp.markov_order = 2;
  hp.d_model = 16;
  hp.d_ff = 32;
  hp.n_head = 2;
  hp.n_markov = 1;
  hp.dropout_rate = 0.0;
  // cross-entropy here: focal gamma > 0 is not a proper scoring rule and
  // biases the learned conditionals toward uniform
  hp.focal_gamma = 0.0;
  hp.lr_initial = 5e-3;
  hp.lr_drops = {{15, 5e-3 / 3}, {22, 5e-4}};
  hp.batch_size = 128;
  hp.steps_per_epoch = 300;
  hp.max_epochs = 30;
  hp.early_stop_patience = 30;
  StateGenModel model(5, StampKind::Unitless, hp, 7002);

  auto stamps = TimeStampVector::uniform(0.0, 1.0, n);
  auto windows = build_state_windows(source, stamps, 2);
  std::vector<StateWindow> train(windows.begin(), windows.end() - 2000);
  std::vector<StateWindow> val(windows.end() - 2000, windows.end());
  model.train(train, val, {}, 7003);

  auto generated = model.generate({source.states[0], source.states[1]},
                                  TimeStampVector::uniform(0.0, 1.0, n + 2), n, 7004);

  auto freq_src = state_frequencies({source});
  auto freq_gen = state_frequencies({generated});
  out_tv1 = tv_distance(freq_src, freq_gen);
  out_tv2 = tv_distance(bigram_frequencies(source), bigram_frequencies(generated));
}

// ---------------------------------------------------------------------------
// criterion 8a: eight-window overfit

bool criterion_8a(double& final_loss, int& steps) {
  HyperParams hp;
  hp.q_enc_in = 8;
  hp.q_dec_in = 4;
  hp.q_out = 4;
  hp.n_clusters = 4;
  hp.d_model = 16;
  hp.d_ff = 32;
  hp.n_head = 2;
  hp.n_enc = 1;
  hp.n_dec = 1;
  hp.dropout_rate = 0.0;
  hp.loss = "l1";
  hp.lr_initial = 3e-3;
  hp.batch_size = 8;
  hp.max_epochs = 500;
  hp.early_stop_patience = 1000000;
  GenFormerModel model(2, StampKind::Unitless, hp, 8001);

  Rng rng(8002);
  std::vector<WindowPair> windows;
  for (int k = 0; k < 8; ++k) {
    WindowPair w;
    w.m = 2;
    w.q_enc = 8;
    w.q_out = 4;
    w.enc_x.resize(16);
    w.target_x.resize(8);
    for (double& v : w.enc_x) v = rng.normal();
    for (double& v : w.target_x) v = rng.normal();
    for (int j = 0; j < 8; ++j) w.enc_y.push_back(static_cast<int>(rng.index(4)));
    for (int j = 0; j < 4; ++j) w.out_y.push_back(static_cast<int>(rng.index(4)));
    w.enc_t = TimeStampVector::uniform(k, 1.0, 8);
    w.out_t = TimeStampVector::uniform(k + 8.0, 1.0, 4);
    windows.push_back(std::move(w));
  }
  auto result = model.train(windows, {}, 8003);
  steps = result.epochs_run;  // one batch per epoch
  final_loss = result.train_loss.back();
  for (double loss : result.train_loss)
    if (loss < 0.05) return true;
  return false;
}

// ---------------------------------------------------------------------------

struct TailCurves {
  std::vector<double> target, genformer, translation;
  int points = 0;
};

TailCurves tail50_curves(const std::vector<double>& s_target,
                         const std::vector<double>& s_genformer,
                         const std::vector<double>& s_translation,
                         const std::vector<double>& grid) {
  auto p_t = exceedance_curve(s_target, grid);
  auto p_g = exceedance_curve(s_genformer, grid);
  auto p_b = exceedance_curve(s_translation, grid);
  TailCurves out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (p_t[g] * s_target.size() < 50.0) continue;
    if (p_g[g] * s_genformer.size() < 50.0) continue;
    if (p_b[g] * s_translation.size() < 50.0) continue;
    out.target.push_back(p_t[g]);
    out.genformer.push_back(p_g[g]);
    out.translation.push_back(p_b[g]);
    ++out.points;
  }
  return out;
}

int main_impl() {
  std::printf("== GenFormer acceptance suite ==\n");
  criterion_1();
  criterion_2();
  criterion_3();
  criterion_5();
  criterion_6();

  {
    double tv1 = 0.0, tv2 = 0.0;
    criterion_7a(tv1, tv2);
    report(7, tv1 < 0.05 && tv2 < 0.05,
           "state generator matches order-2 chain n-gram frequencies (part a)",
           fmt("1-gram TV %.4f, 2-gram TV %.4f", tv1, tv2));
  }
  {
    double final_loss = 0.0;
    int steps = 0;
    bool ok = criterion_8a(final_loss, steps);
    report(8, ok, "eight-window overfit reaches train L1 < 0.05 (part a)",
           fmt("final L1 %.4f after %d steps", final_loss, steps));
  }

  // criterion 10 on the fast dry-run profile
  {
    fs::path a = "acceptance_work/determinism_a";
    fs::path b = "acceptance_work/determinism_b";
    fs::remove_all(a);
    fs::remove_all(b);
    auto cfg = PipelineConfig::profile("sde", "dryrun");
    run_pipeline(cfg, a);
    run_pipeline(cfg, b);
    bool same = io::read_text(a / "report.json") == io::read_text(b / "report.json");
    int figures = 0;
    for (const auto& entry : fs::directory_iterator(a / "figures")) {
      ++figures;
      same = same && io::read_text(entry.path()) ==
                         io::read_text(b / "figures" / entry.path().filename());
    }
    report(10, same, "identical config and seeds give byte-identical reports",
           fmt("report.json and %d figure CSVs compared", figures));
  }

  // the shared desk-scale pipeline for criteria 4, 7b, 8b, 9
  std::printf("-- running the desk-scale SDE pipeline (shared by criteria 4, 7b, 8b, 9) --\n");
  std::fflush(stdout);
  fs::path desk = "acceptance_work/desk";
  fs::remove_all(desk);
  auto cfg = PipelineConfig::profile("sde", "desk");
  const double t_desk = now_seconds();
  nlohmann::json rep = run_pipeline(cfg, desk);
  std::printf("-- desk pipeline finished in %.0f s --\n", now_seconds() - t_desk);

  {  // criterion 4: marginal exactness of the final output
    auto final_gauss =
        io::read_realization_csv(desk / "synthetic_final_gaussian_concat.csv", Space::Gaussian);
    double worst_d = 0.0, crit = 0.0;
    for (int i = 0; i < final_gauss.m; ++i) {
      std::vector<double> row(final_gauss.row(i), final_gauss.row(i) + final_gauss.n);
      double d = ks_statistic(row, [](double x) { return gaussian_cdf(x); });
      worst_d = std::max(worst_d, d);
      crit = ks_critical_value(0.01, row.size());
    }
    report(4, worst_d < crit, "final output passes KS vs standard Gaussian per location",
           fmt("worst D %.5f < %.5f at n=%d", worst_d, crit, final_gauss.n));
  }

  {  // criterion 7b: state-frequency scatter correlation
    double r = rep["state_frequencies"]["pearson_r"].get<double>();
    report(7, r > 0.9, "desk pipeline state-frequency scatter (part b)",
           fmt("pearson r = %.4f", r));
  }

  {  // criterion 8b: tracked validation trajectory
    double l1 = rep["tracking"]["l1_error"].get<double>();
    double val = rep["tracking"]["val_loss"].get<double>();
    report(8, l1 <= 2.0 * val, "known-state reconstruction tracks the target (part b)",
           fmt("tracking L1 %.4f vs validation loss %.4f (ratio %.2f)", l1, val, l1 / val));
  }

  {  // criterion 9: downstream return periods, GenFormer vs translation
    auto observations = io::read_realization_dir(desk / "observations", Space::Physical);
    auto synthetic = io::read_realization_dir(desk / "synthetic", Space::Physical);
    auto baseline = io::read_realization_dir(desk / "baseline", Space::Physical);
    auto s_target = sde_metric_S(observations);
    auto s_genformer = sde_metric_S(synthetic);
    auto s_translation = sde_metric_S(baseline);
    auto grid = make_grid(cfg.exceedance_min, cfg.exceedance_max, cfg.exceedance_step);
    auto curves = tail50_curves(s_target, s_genformer, s_translation, grid);
    double err_g = return_period_l1_error(curves.target, curves.genformer);
    double err_b = return_period_l1_error(curves.target, curves.translation);
    report(9, err_g < err_b,
           "GenFormer beats the translation baseline on return periods",
           fmt("L1 %.4f vs %.4f over %d grid points with >= 50 tail samples", err_g, err_b,
               curves.points));
  }

  std::printf("== %s: %d criterion checks failed ==\n", g_failures == 0 ? "SUCCESS" : "FAILURE",
              g_failures);
  return g_failures == 0 ? 0 : 1;
}

}  // namespace

int main() {
  try {
    return main_impl();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "acceptance suite aborted: %s\n", e.what());
    return 2;
  }
}
