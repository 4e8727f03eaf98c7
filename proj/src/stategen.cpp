#include "genformer/stategen.hpp"

#include <cmath>

#include "genformer/io.hpp"

#include "train_loop.hpp"

namespace genformer {

using nn::Tape;
using nn::Tensor;

namespace {

std::string blk_name(int block, const char* leaf) {
  return "blk" + std::to_string(block) + "." + leaf;
}

}  // namespace

StateGenModel::StateGenModel(int n_states, StampKind stamp_kind, HyperParams hp,
                             std::uint64_t init_seed)
    : n_states_(n_states), stamp_kind_(stamp_kind), hp_(std::move(hp)), init_seed_(init_seed) {
  if (n_states_ <= 0) throw DomainError("StateGenModel: n_states must be positive");
  hp_.validate();
  const int d = hp_.d_model;
  Rng rng(Rng::derive(init_seed, 7002));

  auto linear = [&](const std::string& name, int rows, int cols, int fan_in, int fan_out) {
    nn::init_xavier_uniform(params_.create(name, rows, cols).value, fan_in, fan_out, rng);
  };
  // Column n_states is the learned placeholder query.
  nn::init_normal(params_.create("embed.state.table", d, n_states_ + 1).value, 0.02, rng);
  if (stamp_kind_ == StampKind::Calendar) linear("embed.time.w", d, 4, 4, d);

  for (int i = 0; i < hp_.n_markov; ++i) {
    linear(blk_name(i, "attn.wq"), d, d, d, d);
    linear(blk_name(i, "attn.wk"), d, d, d, d);
    linear(blk_name(i, "attn.wv"), d, d, d, d);
    linear(blk_name(i, "attn.wo"), d, d, d, d);
    params_.create(blk_name(i, "ln1.gain"), d, 1).value = Tensor::full(d, 1, 1.0);
    params_.create(blk_name(i, "ln1.bias"), d, 1);
    linear(blk_name(i, "ffn.w1"), hp_.d_ff, d, d, hp_.d_ff);
    params_.create(blk_name(i, "ffn.b1"), hp_.d_ff, 1);
    linear(blk_name(i, "ffn.w2"), d, hp_.d_ff, hp_.d_ff, d);
    params_.create(blk_name(i, "ffn.b2"), d, 1);
    params_.create(blk_name(i, "ln2.gain"), d, 1).value = Tensor::full(d, 1, 1.0);
    params_.create(blk_name(i, "ln2.bias"), d, 1);
  }
  linear("out.w", n_states_, d, d, n_states_);
  params_.create("out.b", n_states_, 1);
}

void StateGenModel::set_year_range(int year_min, int year_max) {
  year_min_ = year_min;
  year_max_ = year_max;
}

int StateGenModel::forward_graph(Tape& tape, const std::vector<int>& history,
                                 const TimeStampVector& stamps, bool train,
                                 Rng* dropout_rng) const {
  const int p = hp_.markov_order;
  if (static_cast<int>(history.size()) != p)
    throw ShapeMismatch("stategen forward: history must hold p states");
  if (stamps.size() != p + 1)
    throw ShapeMismatch("stategen forward: need p + 1 stamps");
  for (int s : history)
    if (s < 0 || s >= n_states_) throw UnknownState("stategen forward: state out of range");

  // History states plus the placeholder column.
  std::vector<int> indices = history;
  indices.push_back(n_states_);
  int z = nn::markov_state_embedding(tape, tape.leaf(params_.get("embed.state.table")), indices);
  int te;
  if (stamp_kind_ == StampKind::Unitless) {
    te = tape.constant(nn::positional_embedding(p + 1, hp_.d_model));
  } else {
    te = tape.matmul(tape.leaf(params_.get("embed.time.w")),
                     tape.constant(nn::calendar_features(stamps, year_min_, year_max_)));
  }
  z = tape.add(z, te);
  z = tape.dropout(z, hp_.dropout_rate, dropout_rng, train);

  for (int i = 0; i < hp_.n_markov; ++i) {
    nn::AttnNodes attn;
    attn.wq = tape.leaf(params_.get(blk_name(i, "attn.wq")));
    attn.wk = tape.leaf(params_.get(blk_name(i, "attn.wk")));
    attn.wv = tape.leaf(params_.get(blk_name(i, "attn.wv")));
    attn.wo = tape.leaf(params_.get(blk_name(i, "attn.wo")));
    int a = nn::self_attention(tape, z, attn, hp_.n_head, true);
    a = tape.dropout(a, hp_.dropout_rate, dropout_rng, train);
    nn::LayerNormNodes ln1{tape.leaf(params_.get(blk_name(i, "ln1.gain"))),
                           tape.leaf(params_.get(blk_name(i, "ln1.bias")))};
    z = nn::layer_norm(tape, tape.add(z, a), ln1);
    nn::FfnNodes ffn{tape.leaf(params_.get(blk_name(i, "ffn.w1"))),
                     tape.leaf(params_.get(blk_name(i, "ffn.b1"))),
                     tape.leaf(params_.get(blk_name(i, "ffn.w2"))),
                     tape.leaf(params_.get(blk_name(i, "ffn.b2")))};
    int f = nn::feed_forward(tape, z, ffn);
    f = tape.dropout(f, hp_.dropout_rate, dropout_rng, train);
    nn::LayerNormNodes ln2{tape.leaf(params_.get(blk_name(i, "ln2.gain"))),
                           tape.leaf(params_.get(blk_name(i, "ln2.bias")))};
    z = nn::layer_norm(tape, tape.add(z, f), ln2);
  }

  // The placeholder position carries the next-state weights.
  int last = tape.slice_cols(z, p, p + 1);
  int logits = tape.add_colvec(tape.matmul(tape.leaf(params_.get("out.w")), last),
                               tape.leaf(params_.get("out.b")));
  return tape.softmax_cols(logits);
}

std::vector<double> StateGenModel::next_state_probs(const std::vector<int>& history,
                                                    const TimeStampVector& stamps) const {
  Tape tape;
  int probs = forward_graph(tape, history, stamps, false, nullptr);
  return tape.value(probs).v;
}

nn::TrainResult StateGenModel::train(const std::vector<StateWindow>& train_windows,
                                     const std::vector<StateWindow>& val_windows,
                                     const std::vector<double>& class_weights,
                                     std::uint64_t seed) {
  if (!class_weights.empty() && static_cast<int>(class_weights.size()) != n_states_)
    throw ShapeMismatch("stategen train: class weight count != n_states");
  auto weight_of = [&](int cls) {
    return class_weights.empty() ? 1.0 : class_weights[cls];
  };
  return nn::run_training(
      params_, train_windows, val_windows, hp_, seed,
      [this, &weight_of](Tape& tape, const StateWindow& w, bool training, Rng* rng) {
        int probs = forward_graph(tape, w.history, w.stamps, training, rng);
        return tape.focal_loss(probs, w.target, hp_.focal_gamma, weight_of(w.target));
      });
}

MarkovStateSequence StateGenModel::generate(const std::vector<int>& init,
                                            const TimeStampVector& stamps, int n_steps,
                                            std::uint64_t seed) const {
  const int p = hp_.markov_order;
  if (static_cast<int>(init.size()) != p)
    throw ShapeMismatch("stategen generate: init must hold p states");
  if (stamps.size() < p + n_steps)
    throw ShapeMismatch("stategen generate: stamps must cover p + n_steps positions");

  Rng rng(seed);
  std::vector<int> window = init;
  MarkovStateSequence out;
  out.n_states = n_states_;
  out.states.reserve(n_steps);
  for (int step = 0; step < n_steps; ++step) {
    auto probs = next_state_probs(window, stamps.slice(step, p + 1));
    double u = rng.uniform01();
    double acc = 0.0;
    int next = n_states_ - 1;
    for (int s = 0; s < n_states_; ++s) {
      acc += probs[s];
      if (u <= acc) {
        next = s;
        break;
      }
    }
    out.states.push_back(next);
    window.erase(window.begin());
    window.push_back(next);
  }
  return out;
}

void StateGenModel::save(const std::filesystem::path& dir) const {
  nlohmann::json manifest;
  manifest["kind"] = "stategen";
  manifest["n_states"] = n_states_;
  manifest["stamp_kind"] = stamp_kind_ == StampKind::Calendar ? "calendar" : "unitless";
  manifest["year_min"] = year_min_;
  manifest["year_max"] = year_max_;
  manifest["init_seed"] = init_seed_;
  manifest["hyperparams"] = nn::hyperparams_to_json(hp_);
  nn::save_params(dir, params_, std::move(manifest));
}

StateGenModel StateGenModel::load(const std::filesystem::path& dir) {
  nlohmann::json manifest = io::read_json(dir / "manifest.json");
  if (manifest.value("kind", "") != "stategen")
    throw IoError("not a stategen checkpoint: " + dir.string());
  StateGenModel model(manifest.at("n_states"),
                      manifest.at("stamp_kind") == "calendar" ? StampKind::Calendar
                                                              : StampKind::Unitless,
                      nn::hyperparams_from_json(manifest.at("hyperparams")),
                      manifest.at("init_seed"));
  model.set_year_range(manifest.at("year_min"), manifest.at("year_max"));
  nn::load_params(dir, model.params_);
  return model;
}

}  // namespace genformer
