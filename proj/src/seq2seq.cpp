#include "genformer/seq2seq.hpp"

#include <cmath>

#include "genformer/io.hpp"

#include "train_loop.hpp"

namespace genformer {

using nn::Tape;
using nn::Tensor;

namespace {

constexpr int kValueKernel = 3;

std::string enc_name(int block, const char* leaf) {
  return "enc" + std::to_string(block) + "." + leaf;
}
std::string dec_name(int block, const char* leaf) {
  return "dec" + std::to_string(block) + "." + leaf;
}

}  // namespace

GenFormerModel::GenFormerModel(int m, StampKind stamp_kind, HyperParams hp,
                               std::uint64_t init_seed)
    : m_(m), stamp_kind_(stamp_kind), hp_(std::move(hp)), init_seed_(init_seed) {
  if (m_ <= 0) throw DomainError("GenFormerModel: m must be positive");
  hp_.validate();
  const int d = hp_.d_model;
  Rng rng(Rng::derive(init_seed, 7001));

  auto linear = [&](const std::string& name, int rows, int cols, int fan_in, int fan_out) {
    nn::init_xavier_uniform(params_.create(name, rows, cols).value, fan_in, fan_out, rng);
  };
  auto layer_norm_pair = [&](const std::string& prefix) {
    params_.create(prefix + ".gain", d, 1).value = Tensor::full(d, 1, 1.0);
    params_.create(prefix + ".bias", d, 1);
  };
  auto attention = [&](const std::string& prefix) {
    linear(prefix + ".wq", d, d, d, d);
    linear(prefix + ".wk", d, d, d, d);
    linear(prefix + ".wv", d, d, d, d);
    linear(prefix + ".wo", d, d, d, d);
  };
  auto ffn = [&](const std::string& prefix) {
    linear(prefix + ".w1", hp_.d_ff, d, d, hp_.d_ff);
    params_.create(prefix + ".b1", hp_.d_ff, 1);
    linear(prefix + ".w2", d, hp_.d_ff, hp_.d_ff, d);
    params_.create(prefix + ".b2", d, 1);
  };

  linear("embed.value.w", d, m_ * kValueKernel, m_ * kValueKernel, d);
  nn::init_normal(params_.create("embed.state.table", d, hp_.n_clusters).value, 0.02, rng);
  if (stamp_kind_ == StampKind::Calendar) linear("embed.time.w", d, 4, 4, d);

  for (int i = 0; i < hp_.n_enc; ++i) {
    attention(enc_name(i, "attn"));
    layer_norm_pair(enc_name(i, "ln1"));
    ffn(enc_name(i, "ffn"));
    layer_norm_pair(enc_name(i, "ln2"));
  }
  for (int i = 0; i < hp_.n_dec; ++i) {
    attention(dec_name(i, "self"));
    layer_norm_pair(dec_name(i, "ln1"));
    attention(dec_name(i, "cross"));
    layer_norm_pair(dec_name(i, "ln2"));
    ffn(dec_name(i, "ffn"));
    layer_norm_pair(dec_name(i, "ln3"));
  }
  linear("out.w", m_, d, d, m_);
  params_.create("out.b", m_, 1);
}

void GenFormerModel::set_year_range(int year_min, int year_max) {
  year_min_ = year_min;
  year_max_ = year_max;
}

int GenFormerModel::embed_graph(Tape& tape, const std::vector<double>& x, int q,
                          const std::vector<int>& y, const TimeStampVector& stamps, bool train,
                          Rng* dropout_rng) const {
  if (static_cast<int>(x.size()) != m_ * q || static_cast<int>(y.size()) != q)
    throw ShapeMismatch("embed: input widths disagree");
  Tensor values(m_, q);
  values.v = x;
  int vx = tape.conv1d_circular(tape.constant(std::move(values)),
                                tape.leaf(params_.get("embed.value.w")), kValueKernel);
  int sy = nn::markov_state_embedding(tape, tape.leaf(params_.get("embed.state.table")), y);
  int te;
  if (stamp_kind_ == StampKind::Unitless) {
    te = tape.constant(nn::positional_embedding(q, hp_.d_model));
  } else {
    te = tape.matmul(tape.leaf(params_.get("embed.time.w")),
                     tape.constant(nn::calendar_features(stamps, year_min_, year_max_)));
  }
  int z = tape.add(tape.add(vx, sy), te);
  return tape.dropout(z, hp_.dropout_rate, dropout_rng, train);
}

int GenFormerModel::forward_graph(Tape& tape, const WindowPair& window, bool train,
                                  Rng* dropout_rng) const {
  if (window.m != m_ || window.q_enc != hp_.q_enc_in || window.q_out != hp_.q_out)
    throw ShapeMismatch("forward: window shape does not match hyperparameters");
  const int q_dec = hp_.q_dec_in;
  const int q_out = hp_.q_out;
  const double rate = hp_.dropout_rate;

  auto attn_nodes = [&](const std::string& prefix) {
    nn::AttnNodes a;
    a.wq = tape.leaf(params_.get(prefix + ".wq"));
    a.wk = tape.leaf(params_.get(prefix + ".wk"));
    a.wv = tape.leaf(params_.get(prefix + ".wv"));
    a.wo = tape.leaf(params_.get(prefix + ".wo"));
    return a;
  };
  auto ffn_nodes = [&](const std::string& prefix) {
    nn::FfnNodes f;
    f.w1 = tape.leaf(params_.get(prefix + ".w1"));
    f.b1 = tape.leaf(params_.get(prefix + ".b1"));
    f.w2 = tape.leaf(params_.get(prefix + ".w2"));
    f.b2 = tape.leaf(params_.get(prefix + ".b2"));
    return f;
  };
  auto ln_nodes = [&](const std::string& prefix) {
    nn::LayerNormNodes l;
    l.gain = tape.leaf(params_.get(prefix + ".gain"));
    l.bias = tape.leaf(params_.get(prefix + ".bias"));
    return l;
  };

  // Encoder stack.
  int z_enc = embed_graph(tape, window.enc_x, window.q_enc, window.enc_y, window.enc_t, train,
                    dropout_rng);
  for (int i = 0; i < hp_.n_enc; ++i) {
    int a = nn::self_attention(tape, z_enc, attn_nodes(enc_name(i, "attn")), hp_.n_head, false);
    a = tape.dropout(a, rate, dropout_rng, train);
    z_enc = nn::layer_norm(tape, tape.add(z_enc, a), ln_nodes(enc_name(i, "ln1")));
    int f = nn::feed_forward(tape, z_enc, ffn_nodes(enc_name(i, "ffn")));
    f = tape.dropout(f, rate, dropout_rng, train);
    z_enc = nn::layer_norm(tape, tape.add(z_enc, f), ln_nodes(enc_name(i, "ln2")));
  }

  // Decoder inputs: the last q_dec_in encoder columns as the start block, a
  // zero placeholder where the output goes.
  std::vector<double> x_dec(static_cast<std::size_t>(m_) * (q_dec + q_out), 0.0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < q_dec; ++j)
      x_dec[static_cast<std::size_t>(i) * (q_dec + q_out) + j] =
          window.enc_x[static_cast<std::size_t>(i) * window.q_enc + (window.q_enc - q_dec + j)];
  std::vector<int> y_dec(window.enc_y.end() - q_dec, window.enc_y.end());
  y_dec.insert(y_dec.end(), window.out_y.begin(), window.out_y.end());
  TimeStampVector t_dec = TimeStampVector::concat(
      window.enc_t.slice(window.q_enc - q_dec, q_dec), window.out_t);

  int z_dec = embed_graph(tape, x_dec, q_dec + q_out, y_dec, t_dec, train, dropout_rng);
  for (int i = 0; i < hp_.n_dec; ++i) {
    int a = nn::self_attention(tape, z_dec, attn_nodes(dec_name(i, "self")), hp_.n_head, true);
    a = tape.dropout(a, rate, dropout_rng, train);
    z_dec = nn::layer_norm(tape, tape.add(z_dec, a), ln_nodes(dec_name(i, "ln1")));
    int c = nn::cross_attention(tape, z_dec, z_enc, attn_nodes(dec_name(i, "cross")), hp_.n_head);
    c = tape.dropout(c, rate, dropout_rng, train);
    z_dec = nn::layer_norm(tape, tape.add(z_dec, c), ln_nodes(dec_name(i, "ln2")));
    int f = nn::feed_forward(tape, z_dec, ffn_nodes(dec_name(i, "ffn")));
    f = tape.dropout(f, rate, dropout_rng, train);
    z_dec = nn::layer_norm(tape, tape.add(z_dec, f), ln_nodes(dec_name(i, "ln3")));
  }

  int out = tape.add_colvec(tape.matmul(tape.leaf(params_.get("out.w")), z_dec),
                            tape.leaf(params_.get("out.b")));
  // Only the last q_out positions are the prediction.
  return tape.slice_cols(out, q_dec, q_dec + q_out);
}

Tensor GenFormerModel::predict(const WindowPair& window) const {
  Tape tape;
  int pred = forward_graph(tape, window, false, nullptr);
  return tape.value(pred);
}

int GenFormerModel::loss_graph(Tape& tape, const WindowPair& window, bool train,
                               Rng* dropout_rng) const {
  int pred = forward_graph(tape, window, train, dropout_rng);
  Tensor target(m_, hp_.q_out);
  target.v = window.target_x;
  return hp_.loss == "l2" ? tape.l2_loss(pred, std::move(target))
                          : tape.l1_loss(pred, std::move(target));
}

nn::TrainResult GenFormerModel::train(const std::vector<WindowPair>& train_windows,
                                      const std::vector<WindowPair>& val_windows,
                                      std::uint64_t seed) {
  return nn::run_training(params_, train_windows, val_windows, hp_, seed,
                          [this](Tape& tape, const WindowPair& w, bool training, Rng* rng) {
                            return loss_graph(tape, w, training, rng);
                          });
}

TimeSeriesMatrix GenFormerModel::infer_autoregressive(const std::vector<double>& init_x,
                                                      const std::vector<int>& init_y,
                                                      const TimeStampVector& init_t,
                                                      const std::vector<int>& future_y,
                                                      const TimeStampVector& future_t,
                                                      Space space) const {
  const int q_enc = hp_.q_enc_in;
  const int q_out = hp_.q_out;
  if (static_cast<int>(init_x.size()) != m_ * q_enc ||
      static_cast<int>(init_y.size()) != q_enc || init_t.size() != q_enc)
    throw ShapeMismatch("infer_autoregressive: init block must cover q_enc_in stamps");
  const int n_future = static_cast<int>(future_y.size());
  if (future_t.size() != n_future)
    throw ShapeMismatch("infer_autoregressive: future states and stamps disagree");
  if (n_future == 0) return TimeSeriesMatrix(m_, 0, space, future_t);

  const int n_iter = (n_future + q_out - 1) / q_out;
  const int padded = n_iter * q_out;

  // Combined value buffer: observed init block followed by generated columns.
  Tensor buffer(m_, q_enc + padded);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < q_enc; ++j)
      buffer.at(i, j) = init_x[static_cast<std::size_t>(i) * q_enc + j];

  std::vector<int> all_y = init_y;
  all_y.insert(all_y.end(), future_y.begin(), future_y.end());
  all_y.resize(q_enc + padded, future_y.back());  // pad a partial final block
  TimeStampVector all_t = TimeStampVector::concat(init_t, future_t);
  if (padded > n_future) all_t = all_t.extended(padded - n_future);

  for (int l = 0; l < n_iter; ++l) {
    WindowPair w;
    w.m = m_;
    w.q_enc = q_enc;
    w.q_out = q_out;
    const int start = l * q_out;
    w.enc_x.resize(static_cast<std::size_t>(m_) * q_enc);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < q_enc; ++j)
        w.enc_x[static_cast<std::size_t>(i) * q_enc + j] = buffer.at(i, start + j);
    w.enc_y.assign(all_y.begin() + start, all_y.begin() + start + q_enc);
    w.enc_t = all_t.slice(start, q_enc);
    w.out_y.assign(all_y.begin() + start + q_enc, all_y.begin() + start + q_enc + q_out);
    w.out_t = all_t.slice(start + q_enc, q_out);
    w.target_x.assign(static_cast<std::size_t>(m_) * q_out, 0.0);

    Tensor pred = predict(w);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < q_out; ++j) buffer.at(i, q_enc + start + j) = pred.at(i, j);
  }

  TimeSeriesMatrix out(m_, n_future, space, future_t);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < n_future; ++j) out.at(i, j) = buffer.at(i, q_enc + j);
  return out;
}

void GenFormerModel::save(const std::filesystem::path& dir) const {
  nlohmann::json manifest;
  manifest["kind"] = "genformer";
  manifest["m"] = m_;
  manifest["stamp_kind"] = stamp_kind_ == StampKind::Calendar ? "calendar" : "unitless";
  manifest["year_min"] = year_min_;
  manifest["year_max"] = year_max_;
  manifest["init_seed"] = init_seed_;
  manifest["hyperparams"] = nn::hyperparams_to_json(hp_);
  nn::save_params(dir, params_, std::move(manifest));
}

GenFormerModel GenFormerModel::load(const std::filesystem::path& dir) {
  nlohmann::json manifest = io::read_json(dir / "manifest.json");
  if (manifest.value("kind", "") != "genformer")
    throw IoError("not a genformer checkpoint: " + dir.string());
  GenFormerModel model(manifest.at("m"),
                       manifest.at("stamp_kind") == "calendar" ? StampKind::Calendar
                                                               : StampKind::Unitless,
                       nn::hyperparams_from_json(manifest.at("hyperparams")),
                       manifest.at("init_seed"));
  model.set_year_range(manifest.at("year_min"), manifest.at("year_max"));
  nn::load_params(dir, model.params_);
  return model;
}

}  // namespace genformer
