#include "genformer/tape.hpp"

#include <cmath>

namespace genformer::nn {

Param& ParamStore::create(const std::string& name, int rows, int cols) {
  if (index_.count(name)) throw DomainError("ParamStore: duplicate parameter " + name);
  auto p = std::make_unique<Param>();
  p->name = name;
  p->value = Tensor(rows, cols);
  p->grad = Tensor(rows, cols);
  p->m = Tensor(rows, cols);
  p->v = Tensor(rows, cols);
  index_[name] = items_.size();
  items_.push_back(std::move(p));
  return *items_.back();
}

Param& ParamStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw DomainError("ParamStore: unknown parameter " + name);
  return *items_[it->second];
}

const Param& ParamStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw DomainError("ParamStore: unknown parameter " + name);
  return *items_[it->second];
}

void ParamStore::zero_grad() {
  for (auto& p : items_) std::fill(p->grad.v.begin(), p->grad.v.end(), 0.0);
}

std::size_t ParamStore::total_entries() const {
  std::size_t total = 0;
  for (const auto& p : items_) total += p->value.size();
  return total;
}

std::vector<Tensor> ParamStore::snapshot_values() const {
  std::vector<Tensor> out;
  out.reserve(items_.size());
  for (const auto& p : items_) out.push_back(p->value);
  return out;
}

void ParamStore::restore_values(const std::vector<Tensor>& values) {
  if (values.size() != items_.size()) throw ShapeMismatch("ParamStore: snapshot size mismatch");
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!values[i].same_shape(items_[i]->value))
      throw ShapeMismatch("ParamStore: snapshot shape mismatch");
    items_[i]->value = values[i];
  }
}

void adam_step(ParamStore& params, const AdamConfig& cfg, int t) {
  if (t < 1) throw DomainError("adam_step: t must be >= 1");
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  for (std::size_t i = 0; i < params.count(); ++i) {
    Param& p = params.at(i);
    for (std::size_t j = 0; j < p.value.size(); ++j) {
      double g = p.grad.v[j];
      p.m.v[j] = cfg.beta1 * p.m.v[j] + (1.0 - cfg.beta1) * g;
      p.v.v[j] = cfg.beta2 * p.v.v[j] + (1.0 - cfg.beta2) * g * g;
      double m_hat = p.m.v[j] / bc1;
      double v_hat = p.v.v[j] / bc2;
      p.value.v[j] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

int Tape::push(Tensor val, std::function<void(Tape&, int)> back, std::string param_name) {
#ifndef NDEBUG
  val.check_finite("tape node");
#endif
  Node node;
  node.val = std::move(val);
  node.back = std::move(back);
  node.param_name = std::move(param_name);
  nodes_.push_back(std::move(node));
  return static_cast<int>(nodes_.size()) - 1;
}

int Tape::leaf(const Param& p) { return push(p.value, {}, p.name); }

int Tape::constant(Tensor t) { return push(std::move(t), {}); }

int Tape::matmul(int a, int b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  Tensor out(A.rows, B.cols);
  mm_nn(A, B, out, false);
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    mm_nt(g, t.value(b), t.grad_mut(a), true);        // dA += g B^T
    mm_tn(t.value(a), g, t.grad_mut(b), true);        // dB += A^T g
  });
}

int Tape::matmul_tA(int a, int b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  Tensor out(A.cols, B.cols);
  mm_tn(A, B, out, false);
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    mm_nt(t.value(b), g, t.grad_mut(a), true);        // dA += B g^T
    mm_nn(t.value(a), g, t.grad_mut(b), true);        // dB += A g
  });
}

int Tape::add(int a, int b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw ShapeMismatch("add: shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] += B.v[i];
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.v[i] += g.v[i];
      gb.v[i] += g.v[i];
    }
  });
}

int Tape::sub(int a, int b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (!A.same_shape(B)) throw ShapeMismatch("sub: shape mismatch");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.v[i] -= B.v[i];
  return push(std::move(out), [a, b](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (std::size_t i = 0; i < g.size(); ++i) {
      ga.v[i] += g.v[i];
      gb.v[i] -= g.v[i];
    }
  });
}

int Tape::add_colvec(int a, int bias) {
  const Tensor& A = value(a);
  const Tensor& B = value(bias);
  if (B.cols != 1 || B.rows != A.rows) throw ShapeMismatch("add_colvec: bias must be rows x 1");
  Tensor out = A;
  for (int r = 0; r < A.rows; ++r) {
    double* dst = out.row(r);
    for (int c = 0; c < A.cols; ++c) dst[c] += B.v[r];
  }
  return push(std::move(out), [a, bias](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(bias);
    for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i];
    for (int r = 0; r < g.rows; ++r) {
      const double* grow = g.row(r);
      double acc = 0.0;
      for (int c = 0; c < g.cols; ++c) acc += grow[c];
      gb.v[r] += acc;
    }
  });
}

int Tape::scale(int a, double s) {
  Tensor out = value(a);
  for (double& x : out.v) x *= s;
  return push(std::move(out), [a, s](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += s * g.v[i];
  });
}

int Tape::relu(int a) {
  Tensor out = value(a);
  for (double& x : out.v) x = x > 0.0 ? x : 0.0;
  return push(std::move(out), [a](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    const Tensor& in = t.value(a);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (in.v[i] > 0.0) ga.v[i] += g.v[i];
  });
}

int Tape::softmax_cols(int a, bool causal) {
  const Tensor& A = value(a);
  if (causal && A.rows != A.cols)
    throw ShapeMismatch("softmax_cols: causal mask needs a square score matrix");
  Tensor out(A.rows, A.cols);
  for (int c = 0; c < A.cols; ++c) {
    const int limit = causal ? c + 1 : A.rows;  // keys s <= query c
    double mx = -1e308;
    for (int r = 0; r < limit; ++r) mx = std::max(mx, A.at(r, c));
    double sum = 0.0;
    for (int r = 0; r < limit; ++r) {
      double e = std::exp(A.at(r, c) - mx);
      out.at(r, c) = e;
      sum += e;
    }
    for (int r = 0; r < limit; ++r) out.at(r, c) /= sum;
    for (int r = limit; r < A.rows; ++r) out.at(r, c) = 0.0;
  }
  return push(std::move(out), [a, causal](Tape& t, int self) {
    const Tensor& p = t.value(self);
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    for (int c = 0; c < p.cols; ++c) {
      const int limit = causal ? c + 1 : p.rows;
      double dot = 0.0;
      for (int r = 0; r < limit; ++r) dot += p.at(r, c) * g.at(r, c);
      for (int r = 0; r < limit; ++r) ga.at(r, c) += p.at(r, c) * (g.at(r, c) - dot);
    }
  });
}

int Tape::layer_norm_cols(int a, int gain, int bias, double eps) {
  const Tensor& A = value(a);
  const Tensor& G = value(gain);
  const Tensor& B = value(bias);
  if (G.cols != 1 || G.rows != A.rows || B.cols != 1 || B.rows != A.rows)
    throw ShapeMismatch("layer_norm_cols: gain/bias must be rows x 1");
  Tensor out(A.rows, A.cols);
  auto xhat = std::make_shared<Tensor>(A.rows, A.cols);
  auto inv_std = std::make_shared<std::vector<double>>(A.cols);
  for (int c = 0; c < A.cols; ++c) {
    double mean = 0.0;
    for (int r = 0; r < A.rows; ++r) mean += A.at(r, c);
    mean /= A.rows;
    double var = 0.0;
    for (int r = 0; r < A.rows; ++r) {
      double d = A.at(r, c) - mean;
      var += d * d;
    }
    var /= A.rows;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[c] = is;
    for (int r = 0; r < A.rows; ++r) {
      double xh = (A.at(r, c) - mean) * is;
      xhat->at(r, c) = xh;
      out.at(r, c) = G.v[r] * xh + B.v[r];
    }
  }
  return push(std::move(out), [a, gain, bias, xhat, inv_std](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    const Tensor& G = t.value(gain);
    Tensor& ga = t.grad_mut(a);
    Tensor& gg = t.grad_mut(gain);
    Tensor& gb = t.grad_mut(bias);
    const int rows = g.rows;
    for (int c = 0; c < g.cols; ++c) {
      double mean_h = 0.0, mean_hx = 0.0;
      for (int r = 0; r < rows; ++r) {
        double h = g.at(r, c) * G.v[r];
        mean_h += h;
        mean_hx += h * xhat->at(r, c);
      }
      mean_h /= rows;
      mean_hx /= rows;
      const double is = (*inv_std)[c];
      for (int r = 0; r < rows; ++r) {
        double h = g.at(r, c) * G.v[r];
        ga.at(r, c) += (h - mean_h - xhat->at(r, c) * mean_hx) * is;
        gg.v[r] += g.at(r, c) * xhat->at(r, c);
        gb.v[r] += g.at(r, c);
      }
    }
  });
}

int Tape::concat_cols(int a, int b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.rows != B.rows) throw ShapeMismatch("concat_cols: row mismatch");
  Tensor out(A.rows, A.cols + B.cols);
  for (int r = 0; r < A.rows; ++r) {
    std::copy_n(A.row(r), A.cols, out.row(r));
    std::copy_n(B.row(r), B.cols, out.row(r) + A.cols);
  }
  const int ac = A.cols;
  return push(std::move(out), [a, b, ac](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    Tensor& gb = t.grad_mut(b);
    for (int r = 0; r < g.rows; ++r) {
      const double* grow = g.row(r);
      double* gar = ga.row(r);
      double* gbr = gb.row(r);
      for (int c = 0; c < ga.cols; ++c) gar[c] += grow[c];
      for (int c = 0; c < gb.cols; ++c) gbr[c] += grow[ac + c];
    }
  });
}

int Tape::slice_cols(int a, int c0, int c1) {
  const Tensor& A = value(a);
  if (c0 < 0 || c1 > A.cols || c0 >= c1) throw ShapeMismatch("slice_cols: bad range");
  Tensor out(A.rows, c1 - c0);
  for (int r = 0; r < A.rows; ++r) std::copy_n(A.row(r) + c0, c1 - c0, out.row(r));
  return push(std::move(out), [a, c0](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    for (int r = 0; r < g.rows; ++r) {
      const double* grow = g.row(r);
      double* gar = ga.row(r) + c0;
      for (int c = 0; c < g.cols; ++c) gar[c] += grow[c];
    }
  });
}

int Tape::slice_rows(int a, int r0, int r1) {
  const Tensor& A = value(a);
  if (r0 < 0 || r1 > A.rows || r0 >= r1) throw ShapeMismatch("slice_rows: bad range");
  Tensor out(r1 - r0, A.cols);
  for (int r = r0; r < r1; ++r) std::copy_n(A.row(r), A.cols, out.row(r - r0));
  return push(std::move(out), [a, r0](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    for (int r = 0; r < g.rows; ++r) {
      const double* grow = g.row(r);
      double* gar = ga.row(r0 + r);
      for (int c = 0; c < g.cols; ++c) gar[c] += grow[c];
    }
  });
}

int Tape::concat_rows(const std::vector<int>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_rows: no parts");
  int rows = 0;
  const int cols = value(parts[0]).cols;
  for (int id : parts) {
    if (value(id).cols != cols) throw ShapeMismatch("concat_rows: column mismatch");
    rows += value(id).rows;
  }
  Tensor out(rows, cols);
  int r_off = 0;
  for (int id : parts) {
    const Tensor& P = value(id);
    for (int r = 0; r < P.rows; ++r) std::copy_n(P.row(r), cols, out.row(r_off + r));
    r_off += P.rows;
  }
  auto parts_copy = parts;
  return push(std::move(out), [parts_copy](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    int r_off = 0;
    for (int id : parts_copy) {
      Tensor& gp = t.grad_mut(id);
      for (int r = 0; r < gp.rows; ++r) {
        const double* grow = g.row(r_off + r);
        double* dst = gp.row(r);
        for (int c = 0; c < gp.cols; ++c) dst[c] += grow[c];
      }
      r_off += gp.rows;
    }
  });
}

int Tape::lookup_cols(int table, const std::vector<int>& indices) {
  const Tensor& T = value(table);
  Tensor out(T.rows, static_cast<int>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    int idx = indices[j];
    if (idx < 0 || idx >= T.cols) throw UnknownState("lookup_cols: index out of range");
    for (int r = 0; r < T.rows; ++r) out.at(r, static_cast<int>(j)) = T.at(r, idx);
  }
  auto idx_copy = indices;
  return push(std::move(out), [table, idx_copy](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& gt = t.grad_mut(table);
    for (std::size_t j = 0; j < idx_copy.size(); ++j)
      for (int r = 0; r < g.rows; ++r) gt.at(r, idx_copy[j]) += g.at(r, static_cast<int>(j));
  });
}

int Tape::conv1d_circular(int x, int kernel, int ksize) {
  const Tensor& X = value(x);
  const Tensor& K = value(kernel);
  if (ksize < 1 || K.cols != X.rows * ksize)
    throw ShapeMismatch("conv1d_circular: kernel must be d_out x (m * ksize)");
  const int m = X.rows;
  const int q = X.cols;
  const int offset = ksize / 2;
  Tensor out(K.rows, q);
  for (int o = 0; o < K.rows; ++o) {
    const double* krow = K.row(o);
    double* dst = out.row(o);
    for (int tap = 0; tap < ksize; ++tap) {
      for (int i = 0; i < m; ++i) {
        const double w = krow[tap * m + i];
        if (w == 0.0) continue;
        const double* src = X.row(i);
        for (int j = 0; j < q; ++j) {
          int s = j + tap - offset;
          s += s < 0 ? q : 0;
          s -= s >= q ? q : 0;
          dst[j] += w * src[s];
        }
      }
    }
  }
  return push(std::move(out), [x, kernel, ksize, m, q, offset](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    const Tensor& X = t.value(x);
    const Tensor& K = t.value(kernel);
    Tensor& gx = t.grad_mut(x);
    Tensor& gk = t.grad_mut(kernel);
    for (int o = 0; o < K.rows; ++o) {
      const double* grow = g.row(o);
      const double* krow = K.row(o);
      double* gkrow = gk.row(o);
      for (int tap = 0; tap < ksize; ++tap) {
        for (int i = 0; i < m; ++i) {
          const double* src = X.row(i);
          double* gxr = gx.row(i);
          const double w = krow[tap * m + i];
          double acc = 0.0;
          for (int j = 0; j < q; ++j) {
            int s = j + tap - offset;
            s += s < 0 ? q : 0;
            s -= s >= q ? q : 0;
            acc += grow[j] * src[s];
            gxr[s] += w * grow[j];
          }
          gkrow[tap * m + i] += acc;
        }
      }
    }
  });
}

int Tape::dropout(int a, double rate, Rng* rng, bool train) {
  if (!train || rate <= 0.0) return a;
  if (!(rate < 1.0)) throw DomainError("dropout: rate must be < 1");
  if (rng == nullptr) throw DomainError("dropout: training mode needs an rng");
  const Tensor& A = value(a);
  auto mask = std::make_shared<Tensor>(A.rows, A.cols);
  const double keep_scale = 1.0 / (1.0 - rate);
  Tensor out(A.rows, A.cols);
  for (std::size_t i = 0; i < A.size(); ++i) {
    double keep = rng->uniform01() >= rate ? keep_scale : 0.0;
    mask->v[i] = keep;
    out.v[i] = A.v[i] * keep;
  }
  return push(std::move(out), [a, mask](Tape& t, int self) {
    const Tensor& g = t.grad(self);
    Tensor& ga = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) ga.v[i] += g.v[i] * mask->v[i];
  });
}

int Tape::l1_loss(int pred, Tensor target) {
  const Tensor& P = value(pred);
  if (!P.same_shape(target)) throw ShapeMismatch("l1_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) acc += std::abs(P.v[i] - target.v[i]);
  const double n = static_cast<double>(P.size());
  Tensor out(1, 1);
  out.v[0] = acc / n;
  auto tgt = std::make_shared<Tensor>(std::move(target));
  return push(std::move(out), [pred, tgt, n](Tape& t, int self) {
    const double g = t.grad(self).v[0] / n;
    const Tensor& P = t.value(pred);
    Tensor& gp = t.grad_mut(pred);
    for (std::size_t i = 0; i < P.size(); ++i) {
      double d = P.v[i] - tgt->v[i];
      gp.v[i] += d > 0.0 ? g : (d < 0.0 ? -g : 0.0);
    }
  });
}

int Tape::l2_loss(int pred, Tensor target) {
  const Tensor& P = value(pred);
  if (!P.same_shape(target)) throw ShapeMismatch("l2_loss: shape mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < P.size(); ++i) {
    double d = P.v[i] - target.v[i];
    acc += d * d;
  }
  const double n = static_cast<double>(P.size());
  Tensor out(1, 1);
  out.v[0] = acc / n;
  auto tgt = std::make_shared<Tensor>(std::move(target));
  return push(std::move(out), [pred, tgt, n](Tape& t, int self) {
    const double g = t.grad(self).v[0] / n;
    const Tensor& P = t.value(pred);
    Tensor& gp = t.grad_mut(pred);
    for (std::size_t i = 0; i < P.size(); ++i) gp.v[i] += 2.0 * g * (P.v[i] - tgt->v[i]);
  });
}

int Tape::focal_loss(int probs, int target_class, double gamma, double class_weight) {
  const Tensor& P = value(probs);
  if (P.cols != 1) throw ShapeMismatch("focal_loss: probs must be a column vector");
  if (target_class < 0 || target_class >= P.rows)
    throw UnknownState("focal_loss: target class out of range");
  const double p = P.v[target_class];
  if (p <= 0.0) throw DegenerateProbability("focal_loss: target probability is not positive");
  Tensor out(1, 1);
  out.v[0] = -class_weight * std::pow(1.0 - p, gamma) * std::log(p);
  return push(std::move(out), [probs, target_class, gamma, class_weight](Tape& t, int self) {
    const double g = t.grad(self).v[0];
    const double p = t.value(probs).v[target_class];
    double d = -class_weight * std::pow(1.0 - p, gamma) / p;
    if (gamma > 0.0 && p < 1.0)
      d += class_weight * gamma * std::pow(1.0 - p, gamma - 1.0) * std::log(p);
    t.grad_mut(probs).v[target_class] += g * d;
  });
}

void Tape::backward(int loss, double seed, ParamStore* store) {
  if (loss < 0 || loss >= static_cast<int>(nodes_.size()))
    throw DomainError("backward: bad loss node");
  if (!nodes_[loss].val.is_scalar()) throw NonScalarLoss("backward: loss must be scalar");
  for (auto& node : nodes_) node.grad = Tensor(node.val.rows, node.val.cols);
  nodes_[loss].grad.v[0] = seed;
  for (int i = loss; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this, i);
  if (store) {
    for (auto& node : nodes_)
      if (!node.param_name.empty()) {
        Tensor& dst = store->get(node.param_name).grad;
        for (std::size_t j = 0; j < dst.size(); ++j) dst.v[j] += node.grad.v[j];
      }
  }
}

}  // namespace genformer::nn
