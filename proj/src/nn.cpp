#include "genformer/nn.hpp"

#include <cmath>

#include "genformer/io.hpp"

namespace genformer::nn {

int multi_head_attention(Tape& t, int z_q, int z_kv, const AttnNodes& w, int n_head,
                         bool causal) {
  const int d_model = t.value(w.wq).rows;
  if (d_model % n_head != 0)
    throw ShapeMismatch("multi_head_attention: d_model not divisible by n_head");
  if (t.value(z_q).rows != d_model || t.value(z_kv).rows != d_model)
    throw ShapeMismatch("multi_head_attention: input row count != d_model");
  const int d_head = d_model / n_head;

  int q = t.matmul(w.wq, z_q);
  int k = t.matmul(w.wk, z_kv);
  int v = t.matmul(w.wv, z_kv);

  std::vector<int> heads;
  heads.reserve(n_head);
  for (int h = 0; h < n_head; ++h) {
    int qh = t.slice_rows(q, h * d_head, (h + 1) * d_head);
    int kh = t.slice_rows(k, h * d_head, (h + 1) * d_head);
    int vh = t.slice_rows(v, h * d_head, (h + 1) * d_head);
    // scores (s, t) = k_s . q_t / sqrt(d_head); softmax over keys per query
    int scores = t.scale(t.matmul_tA(kh, qh), 1.0 / std::sqrt(static_cast<double>(d_head)));
    int weights = t.softmax_cols(scores, causal);
    heads.push_back(t.matmul(vh, weights));
  }
  int merged = n_head == 1 ? heads[0] : t.concat_rows(heads);
  return t.matmul(w.wo, merged);
}

int feed_forward(Tape& t, int z, const FfnNodes& w) {
  int hidden = t.relu(t.add_colvec(t.matmul(w.w1, z), w.b1));
  return t.add_colvec(t.matmul(w.w2, hidden), w.b2);
}

Tensor positional_embedding(int q, int d_model) {
  Tensor out(d_model, q);
  for (int k = 0; 2 * k < d_model; ++k) {
    const double freq = std::pow(10000.0, 2.0 * k / static_cast<double>(d_model));
    for (int j = 0; j < q; ++j) {
      const double arg = j / freq;
      out.at(2 * k, j) = std::sin(arg);
      if (2 * k + 1 < d_model) out.at(2 * k + 1, j) = std::cos(arg);
    }
  }
  return out;
}

Tensor calendar_features(const TimeStampVector& stamps, int year_min, int year_max) {
  if (stamps.kind() != StampKind::Calendar)
    throw DomainError("calendar_features: stamps must be calendar kind");
  const int q = stamps.size();
  Tensor out(4, q);
  auto unit = [](double v, double lo, double hi) {
    return hi > lo ? (v - lo) / (hi - lo) - 0.5 : 0.0;
  };
  for (int j = 0; j < q; ++j) {
    const CalendarStamp& s = stamps.calendar_at(j);
    out.at(0, j) = unit(s.year, year_min, year_max);
    out.at(1, j) = unit(s.month, 1.0, 12.0);
    out.at(2, j) = unit(s.day, 1.0, 31.0);
    out.at(3, j) = unit(s.hour, 0.0, 23.0);
  }
  return out;
}

void save_params(const std::filesystem::path& dir, const ParamStore& params,
                 nlohmann::json manifest_extra) {
  std::filesystem::create_directories(dir);
  std::vector<double> blob;
  blob.reserve(params.total_entries());
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < params.count(); ++i) {
    const Param& p = params.at(i);
    nlohmann::json e;
    e["name"] = p.name;
    e["rows"] = p.value.rows;
    e["cols"] = p.value.cols;
    e["offset"] = blob.size();
    e["count"] = p.value.size();
    list.push_back(e);
    blob.insert(blob.end(), p.value.v.begin(), p.value.v.end());
  }
  nlohmann::json manifest = std::move(manifest_extra);
  manifest["format"] = "genformer-checkpoint-v1";
  manifest["params"] = std::move(list);
  io::write_binary_atomic(dir / "params.bin", blob.data(), blob.size() * sizeof(double));
  io::write_json_atomic(dir / "manifest.json", manifest);
}

nlohmann::json load_params(const std::filesystem::path& dir, ParamStore& params) {
  nlohmann::json manifest = io::read_json(dir / "manifest.json");
  if (manifest.value("format", "") != "genformer-checkpoint-v1")
    throw IoError("unrecognized checkpoint format in " + dir.string());
  std::vector<double> blob = io::read_double_blob(dir / "params.bin");
  for (const auto& e : manifest.at("params")) {
    Param& p = params.has(e.at("name"))
                   ? params.get(e.at("name"))
                   : params.create(e.at("name"), e.at("rows"), e.at("cols"));
    if (p.value.rows != e.at("rows").get<int>() || p.value.cols != e.at("cols").get<int>())
      throw IoError("checkpoint shape mismatch for parameter " + p.name);
    std::size_t offset = e.at("offset");
    std::size_t count = e.at("count");
    if (offset + count > blob.size()) throw IoError("checkpoint blob too small");
    std::copy_n(blob.begin() + offset, count, p.value.v.begin());
  }
  return manifest;
}

nlohmann::json hyperparams_to_json(const HyperParams& hp) {
  nlohmann::json j;
  j["q_enc_in"] = hp.q_enc_in;
  j["q_out"] = hp.q_out;
  j["q_dec_in"] = hp.q_dec_in;
  j["n_clusters"] = hp.n_clusters;
  j["d_model"] = hp.d_model;
  j["d_ff"] = hp.d_ff;
  j["n_head"] = hp.n_head;
  j["n_enc"] = hp.n_enc;
  j["n_dec"] = hp.n_dec;
  j["n_markov"] = hp.n_markov;
  j["markov_order"] = hp.markov_order;
  j["eta"] = hp.eta;
  j["dropout_rate"] = hp.dropout_rate;
  j["lr_initial"] = hp.lr_initial;
  nlohmann::json drops = nlohmann::json::array();
  for (const auto& d : hp.lr_drops) drops.push_back({d.epoch, d.lr});
  j["lr_drops"] = drops;
  j["max_epochs"] = hp.max_epochs;
  j["batch_size"] = hp.batch_size;
  j["steps_per_epoch"] = hp.steps_per_epoch;
  j["early_stop_patience"] = hp.early_stop_patience;
  j["focal_gamma"] = hp.focal_gamma;
  j["tail_class_weight"] = hp.tail_class_weight;
  j["loss"] = hp.loss;
  return j;
}

HyperParams hyperparams_from_json(const nlohmann::json& j) {
  HyperParams hp;
  hp.q_enc_in = j.value("q_enc_in", hp.q_enc_in);
  hp.q_out = j.value("q_out", hp.q_out);
  hp.q_dec_in = j.value("q_dec_in", hp.q_dec_in);
  hp.n_clusters = j.value("n_clusters", hp.n_clusters);
  hp.d_model = j.value("d_model", hp.d_model);
  hp.d_ff = j.value("d_ff", hp.d_ff);
  hp.n_head = j.value("n_head", hp.n_head);
  hp.n_enc = j.value("n_enc", hp.n_enc);
  hp.n_dec = j.value("n_dec", hp.n_dec);
  hp.n_markov = j.value("n_markov", hp.n_markov);
  hp.markov_order = j.value("markov_order", hp.markov_order);
  hp.eta = j.value("eta", hp.eta);
  hp.dropout_rate = j.value("dropout_rate", hp.dropout_rate);
  hp.lr_initial = j.value("lr_initial", hp.lr_initial);
  if (j.contains("lr_drops")) {
    hp.lr_drops.clear();
    for (const auto& d : j.at("lr_drops")) hp.lr_drops.push_back({d.at(0), d.at(1)});
  }
  hp.max_epochs = j.value("max_epochs", hp.max_epochs);
  hp.batch_size = j.value("batch_size", hp.batch_size);
  hp.steps_per_epoch = j.value("steps_per_epoch", hp.steps_per_epoch);
  hp.early_stop_patience = j.value("early_stop_patience", hp.early_stop_patience);
  hp.focal_gamma = j.value("focal_gamma", hp.focal_gamma);
  hp.tail_class_weight = j.value("tail_class_weight", hp.tail_class_weight);
  hp.loss = j.value("loss", hp.loss);
  hp.validate();
  return hp;
}

}  // namespace genformer::nn
