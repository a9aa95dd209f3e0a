#include "cogs/policy.hpp"

#include <cmath>
#include <limits>

#include "cogs/errors.hpp"

namespace cogs {

namespace {

constexpr double kLnEps = 1e-5;

using RowVec = Eigen::RowVectorXd;
using Vec = Eigen::VectorXd;

std::string enc_name(int layer, const char* suffix) {
  return "enc" + std::to_string(layer) + "." + suffix;
}

// Resolved weight views, built once per entry point.
struct LayerW {
  Matrix wq, wk, wv, wo, ln1g, ln1b, w1, b1, w2, b2, ln2g, ln2b;
};
struct PolicyW {
  Matrix we, be;
  std::vector<LayerW> layers;
  Matrix wctx, wkg, wvg, wog, wkp;
};

PolicyW resolve_weights(const SolverPolicy& p) {
  PolicyW w;
  w.we = p.params.value("embed.w");
  w.be = p.params.value("embed.bias");
  for (int l = 0; l < p.config.num_layers; ++l) {
    LayerW lw;
    lw.wq = p.params.value(enc_name(l, "wq"));
    lw.wk = p.params.value(enc_name(l, "wk"));
    lw.wv = p.params.value(enc_name(l, "wv"));
    lw.wo = p.params.value(enc_name(l, "wo"));
    lw.ln1g = p.params.value(enc_name(l, "ln1.gain"));
    lw.ln1b = p.params.value(enc_name(l, "ln1.shift"));
    lw.w1 = p.params.value(enc_name(l, "ffn1.w"));
    lw.b1 = p.params.value(enc_name(l, "ffn1.bias"));
    lw.w2 = p.params.value(enc_name(l, "ffn2.w"));
    lw.b2 = p.params.value(enc_name(l, "ffn2.bias"));
    lw.ln2g = p.params.value(enc_name(l, "ln2.gain"));
    lw.ln2b = p.params.value(enc_name(l, "ln2.shift"));
    w.layers.push_back(std::move(lw));
  }
  w.wctx = p.params.value("dec.wctx");
  w.wkg = p.params.value("dec.wkg");
  w.wvg = p.params.value("dec.wvg");
  w.wog = p.params.value("dec.wog");
  w.wkp = p.params.value("dec.wkp");
  return w;
}

struct LnTrace {
  Vec inv_std;
  Matrix xhat;
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& shift,
                  LnTrace* tr) {
  const int n = static_cast<int>(x.rows());
  const int d = static_cast<int>(x.cols());
  Matrix out(n, d);
  if (tr) {
    tr->inv_std.resize(n);
    tr->xhat.resize(n, d);
  }
  for (int r = 0; r < n; ++r) {
    const double mu = x.row(r).mean();
    const double var = (x.row(r).array() - mu).square().mean();
    const double inv = 1.0 / std::sqrt(var + kLnEps);
    const RowVec xhat = ((x.row(r).array() - mu) * inv).matrix();
    out.row(r) = xhat.cwiseProduct(gain.row(0)) + shift.row(0);
    if (tr) {
      tr->inv_std(r) = inv;
      tr->xhat.row(r) = xhat;
    }
  }
  return out;
}

// d(loss)/dx for y = gain * xhat + shift given dy; accumulates dgain/dshift.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain,
                           const LnTrace& tr, MatrixMap dgain, MatrixMap dshift) {
  const int n = static_cast<int>(dy.rows());
  const int d = static_cast<int>(dy.cols());
  Matrix dx(n, d);
  for (int r = 0; r < n; ++r) {
    const RowVec dyg = dy.row(r).cwiseProduct(gain.row(0));
    const double m1 = dyg.mean();
    const double m2 = dyg.cwiseProduct(tr.xhat.row(r)).mean();
    dx.row(r) =
        ((dyg.array() - m1 - tr.xhat.row(r).array() * m2) * tr.inv_std(r))
            .matrix();
    dgain.row(0) += dy.row(r).cwiseProduct(tr.xhat.row(r));
    dshift.row(0) += dy.row(r);
  }
  return dx;
}

struct LayerTrace {
  Matrix h_in, q, k, v;
  std::vector<Matrix> attn; // per head, n x n
  Matrix concat;            // pre-Wo head outputs, n x d
  Matrix r1;
  LnTrace ln1;
  Matrix h1;
  Matrix ffn_pre; // n x f, pre-relu
  Matrix r2;
  LnTrace ln2;
};

struct EncoderTrace {
  Matrix x; // n x 2
  std::vector<LayerTrace> layers;
};

struct EncodedInternal {
  Matrix h; // n x d
  RowVec graph;
};

EncodedInternal encode_one(const SolverPolicy& policy, const PolicyW& w,
                           const TspInstance& instance, EncoderTrace* tr) {
  const int n = instance.n();
  const int d = policy.config.embed_dim;
  const int heads = policy.config.num_heads;
  const int dh = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  Matrix x(n, 2);
  for (int i = 0; i < n; ++i) {
    x(i, 0) = instance.points[i].x;
    x(i, 1) = instance.points[i].y;
  }
  if (tr) tr->x = x;

  Matrix h = x * w.we;
  h.rowwise() += w.be.row(0);

  for (int l = 0; l < policy.config.num_layers; ++l) {
    const LayerW& lw = w.layers[l];
    LayerTrace* lt = nullptr;
    if (tr) {
      tr->layers.emplace_back();
      lt = &tr->layers.back();
      lt->h_in = h;
    }
    const Matrix q = h * lw.wq;
    const Matrix k = h * lw.wk;
    const Matrix v = h * lw.wv;
    Matrix concat(n, d);
    std::vector<Matrix> attn_heads;
    if (lt) attn_heads.reserve(heads);
    for (int hd = 0; hd < heads; ++hd) {
      const auto qh = q.middleCols(hd * dh, dh);
      const auto kh = k.middleCols(hd * dh, dh);
      const auto vh = v.middleCols(hd * dh, dh);
      Matrix s = (qh * kh.transpose()) * scale;
      for (int r = 0; r < n; ++r) {
        const double mx = s.row(r).maxCoeff();
        s.row(r) = (s.row(r).array() - mx).exp().matrix();
        s.row(r) /= s.row(r).sum();
      }
      concat.middleCols(hd * dh, dh) = s * vh;
      if (lt) attn_heads.push_back(std::move(s));
    }
    Matrix r1 = h + concat * lw.wo;
    if (lt) {
      lt->q = q;
      lt->k = k;
      lt->v = v;
      lt->attn = std::move(attn_heads);
      lt->concat = concat;
      lt->r1 = r1;
    }
    Matrix h1 = layer_norm(r1, lw.ln1g, lw.ln1b, lt ? &lt->ln1 : nullptr);

    Matrix pre = h1 * lw.w1;
    pre.rowwise() += lw.b1.row(0);
    Matrix f = pre.cwiseMax(0.0) * lw.w2;
    f.rowwise() += lw.b2.row(0);
    Matrix r2 = h1 + f;
    if (lt) {
      lt->h1 = h1;
      lt->ffn_pre = pre;
      lt->r2 = r2;
    }
    h = layer_norm(r2, lw.ln2g, lw.ln2b, lt ? &lt->ln2 : nullptr);
  }

  EncodedInternal out;
  out.graph = h.colwise().mean();
  out.h = std::move(h);
  return out;
}

struct GradW {
  MatrixMap we, be;
  struct LayerG {
    MatrixMap wq, wk, wv, wo, ln1g, ln1b, w1, b1, w2, b2, ln2g, ln2b;
  };
  std::vector<LayerG> layers;
  MatrixMap wctx, wkg, wvg, wog, wkp;
};

GradW resolve_grads(SolverPolicy& p) {
  std::vector<GradW::LayerG> layers;
  for (int l = 0; l < p.config.num_layers; ++l) {
    layers.push_back(GradW::LayerG{
        p.params.grad(enc_name(l, "wq")), p.params.grad(enc_name(l, "wk")),
        p.params.grad(enc_name(l, "wv")), p.params.grad(enc_name(l, "wo")),
        p.params.grad(enc_name(l, "ln1.gain")),
        p.params.grad(enc_name(l, "ln1.shift")),
        p.params.grad(enc_name(l, "ffn1.w")),
        p.params.grad(enc_name(l, "ffn1.bias")),
        p.params.grad(enc_name(l, "ffn2.w")),
        p.params.grad(enc_name(l, "ffn2.bias")),
        p.params.grad(enc_name(l, "ln2.gain")),
        p.params.grad(enc_name(l, "ln2.shift"))});
  }
  return GradW{p.params.grad("embed.w"),  p.params.grad("embed.bias"),
               std::move(layers),         p.params.grad("dec.wctx"),
               p.params.grad("dec.wkg"),  p.params.grad("dec.wvg"),
               p.params.grad("dec.wog"),  p.params.grad("dec.wkp")};
}

void encoder_backward(const SolverPolicy& policy, const PolicyW& w, GradW& g,
                      const EncoderTrace& tr, Matrix dh) {
  const int heads = policy.config.num_heads;
  const int d = policy.config.embed_dim;
  const int dh_cols = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh_cols));

  for (int l = policy.config.num_layers - 1; l >= 0; --l) {
    const LayerW& lw = w.layers[l];
    GradW::LayerG& lg = g.layers[l];
    const LayerTrace& lt = tr.layers[l];

    // ln2
    Matrix dr2 = layer_norm_backward(dh, lw.ln2g, lt.ln2, lg.ln2g, lg.ln2b);
    // FFN
    Matrix dh1 = dr2; // residual branch
    const Matrix relu = lt.ffn_pre.cwiseMax(0.0);
    lg.w2 += relu.transpose() * dr2;
    lg.b2.row(0) += dr2.colwise().sum();
    Matrix dpre = (dr2 * lw.w2.transpose())
                      .cwiseProduct((lt.ffn_pre.array() > 0.0).cast<double>().matrix());
    lg.w1 += lt.h1.transpose() * dpre;
    lg.b1.row(0) += dpre.colwise().sum();
    dh1 += dpre * lw.w1.transpose();
    // ln1
    Matrix dr1 = layer_norm_backward(dh1, lw.ln1g, lt.ln1, lg.ln1g, lg.ln1b);
    // MHA
    Matrix dh_in = dr1; // residual branch
    lg.wo += lt.concat.transpose() * dr1;
    const Matrix dconcat = dr1 * lw.wo.transpose();
    Matrix dq = Matrix::Zero(dr1.rows(), d);
    Matrix dk = Matrix::Zero(dr1.rows(), d);
    Matrix dv = Matrix::Zero(dr1.rows(), d);
    for (int hd = 0; hd < heads; ++hd) {
      const auto a = lt.attn[hd];
      const auto vh = lt.v.middleCols(hd * dh_cols, dh_cols);
      const auto qh = lt.q.middleCols(hd * dh_cols, dh_cols);
      const auto kh = lt.k.middleCols(hd * dh_cols, dh_cols);
      const auto dout = dconcat.middleCols(hd * dh_cols, dh_cols);
      Matrix da = dout * vh.transpose();
      dv.middleCols(hd * dh_cols, dh_cols) += a.transpose() * dout;
      // softmax rows backward
      Matrix ds(a.rows(), a.cols());
      for (int r = 0; r < a.rows(); ++r) {
        const double dot = da.row(r).dot(a.row(r));
        ds.row(r) = a.row(r).cwiseProduct((da.row(r).array() - dot).matrix());
      }
      ds *= scale;
      dq.middleCols(hd * dh_cols, dh_cols) += ds * kh;
      dk.middleCols(hd * dh_cols, dh_cols) += ds.transpose() * qh;
    }
    lg.wq += lt.h_in.transpose() * dq;
    lg.wk += lt.h_in.transpose() * dk;
    lg.wv += lt.h_in.transpose() * dv;
    dh_in += dq * lw.wq.transpose() + dk * lw.wk.transpose() +
             dv * lw.wv.transpose();
    dh = std::move(dh_in);
  }

  g.we += tr.x.transpose() * dh;
  g.be.row(0) += dh.colwise().sum();
}

struct StepTrace {
  int prev = 0;
  int chosen = 0;
  std::vector<int> unvisited;
  RowVec q0, gl, g;
  std::vector<Vec> glimpse_att; // per head, length = unvisited count
  Vec z;                        // pointer pre-tanh, per unvisited
  Vec probs;                    // pointer probs, per unvisited
};

struct DecodeTrace {
  Matrix kg, vg, kp;
  std::vector<StepTrace> steps;
};

DecodeResult decode_core(const SolverPolicy& policy, const PolicyW& w,
                         const TspInstance& instance, const Matrix& h,
                         const RowVec& graph, DecodeMode mode, Rng* rng,
                         std::span<const int> forced, DecodeTrace* tr) {
  const int n = instance.n();
  const int d = policy.config.embed_dim;
  const int heads = policy.config.num_heads;
  const int dh = d / heads;
  const double glimpse_scale = 1.0 / std::sqrt(static_cast<double>(dh));
  const double pointer_scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double clip = policy.config.logit_clip;

  const Matrix kg = h * w.wkg;
  const Matrix vg = h * w.wvg;
  const Matrix kp = h * w.wkp;
  if (tr) {
    tr->kg = kg;
    tr->vg = vg;
    tr->kp = kp;
  }

  std::vector<bool> visited(n, false);
  std::vector<int> order;
  order.reserve(n);
  const int start = forced.empty() ? 0 : forced[0];
  order.push_back(start); // probability-one first selection
  visited[start] = true;
  double logp = 0.0;

  for (int t = 1; t < n; ++t) {
    const int prev = order.back();
    RowVec ctx(3 * d);
    ctx << graph, h.row(prev), h.row(order[0]);
    const RowVec q0 = ctx * w.wctx;

    std::vector<int> unvisited;
    unvisited.reserve(n - t);
    for (int j = 0; j < n; ++j)
      if (!visited[j]) unvisited.push_back(j);
    const int m = static_cast<int>(unvisited.size());

    // Glimpse: one multi-head attention read over the unvisited nodes.
    RowVec gl = RowVec::Zero(d);
    std::vector<Vec> att;
    if (tr) att.reserve(heads);
    for (int hd = 0; hd < heads; ++hd) {
      Vec s(m);
      for (int u = 0; u < m; ++u)
        s(u) = q0.segment(hd * dh, dh)
                   .dot(kg.row(unvisited[u]).segment(hd * dh, dh)) *
               glimpse_scale;
      const double mx = s.maxCoeff();
      Vec e = (s.array() - mx).exp();
      e /= e.sum();
      for (int u = 0; u < m; ++u)
        gl.segment(hd * dh, dh) += e(u) * vg.row(unvisited[u]).segment(hd * dh, dh);
      if (tr) att.push_back(std::move(e));
    }
    const RowVec g = gl * w.wog;

    // Pointer logits with tanh clipping.
    Vec z(m);
    for (int u = 0; u < m; ++u)
      z(u) = g.dot(kp.row(unvisited[u])) * pointer_scale;
    const Vec logits = (clip * z.array().tanh()).matrix();
    const double mx = logits.maxCoeff();
    const Eigen::ArrayXd shifted = logits.array() - mx;
    const Eigen::ArrayXd ex = shifted.exp();
    const double denom = ex.sum();
    Vec probs = (ex / denom).matrix();

    int pick_u = 0;
    if (!forced.empty()) {
      pick_u = -1;
      for (int u = 0; u < m; ++u)
        if (unvisited[u] == forced[t]) {
          pick_u = u;
          break;
        }
      if (pick_u < 0)
        throw InvalidArgumentError("decode: forced order revisits a node");
    } else if (mode == DecodeMode::greedy) {
      probs.maxCoeff(&pick_u);
    } else {
      const double target = rng->uniform();
      double cum = 0.0;
      pick_u = m - 1;
      for (int u = 0; u < m; ++u) {
        cum += probs(u);
        if (target < cum) {
          pick_u = u;
          break;
        }
      }
    }

    logp += shifted(pick_u) - std::log(denom);
    const int chosen = unvisited[pick_u];
    visited[chosen] = true;
    order.push_back(chosen);

    if (tr) {
      StepTrace st;
      st.prev = prev;
      st.chosen = chosen;
      st.unvisited = std::move(unvisited);
      st.q0 = q0;
      st.gl = gl;
      st.g = g;
      st.glimpse_att = std::move(att);
      st.z = std::move(z);
      st.probs = std::move(probs);
      tr->steps.push_back(std::move(st));
    }
  }

  DecodeResult res;
  res.tour = make_tour(instance, std::move(order));
  res.log_probability = logp;
  return res;
}

// Accumulates coef * d(logp)/d(params); dh/dgraph pick up the decoder's
// contribution to the encoder outputs.
void decode_backward(const SolverPolicy& policy, const PolicyW& w, GradW& g,
                     const Matrix& h, const RowVec& graph,
                     const DecodeTrace& tr, int first_node, double coef,
                     Matrix& dh, RowVec& dgraph) {
  const int n = static_cast<int>(h.rows());
  const int d = policy.config.embed_dim;
  const int heads = policy.config.num_heads;
  const int dh_cols = d / heads;
  const double glimpse_scale = 1.0 / std::sqrt(static_cast<double>(dh_cols));
  const double pointer_scale = 1.0 / std::sqrt(static_cast<double>(d));
  const double clip = policy.config.logit_clip;

  Matrix dkg = Matrix::Zero(n, d);
  Matrix dvg = Matrix::Zero(n, d);
  Matrix dkp = Matrix::Zero(n, d);

  for (const StepTrace& st : tr.steps) {
    const int m = static_cast<int>(st.unvisited.size());
    // d(logp)/d(logits) = coef * (onehot(chosen) - probs)
    Vec dlogits = -coef * st.probs;
    for (int u = 0; u < m; ++u)
      if (st.unvisited[u] == st.chosen) dlogits(u) += coef;
    // logits = clip * tanh(z)
    Vec dz(m);
    for (int u = 0; u < m; ++u) {
      const double th = std::tanh(st.z(u));
      dz(u) = dlogits(u) * clip * (1.0 - th * th);
    }
    RowVec dg = RowVec::Zero(d);
    for (int u = 0; u < m; ++u) {
      const int j = st.unvisited[u];
      dg += dz(u) * pointer_scale * tr.kp.row(j);
      dkp.row(j) += dz(u) * pointer_scale * st.g;
    }
    // g = gl * Wog
    g.wog += st.gl.transpose() * dg;
    RowVec dgl = dg * w.wog.transpose();
    // glimpse heads
    RowVec dq0 = RowVec::Zero(d);
    for (int hd = 0; hd < heads; ++hd) {
      const Vec& a = st.glimpse_att[hd];
      Vec da(m);
      for (int u = 0; u < m; ++u) {
        const int j = st.unvisited[u];
        da(u) = dgl.segment(hd * dh_cols, dh_cols)
                    .dot(tr.vg.row(j).segment(hd * dh_cols, dh_cols));
        dvg.row(j).segment(hd * dh_cols, dh_cols) +=
            a(u) * dgl.segment(hd * dh_cols, dh_cols);
      }
      const double dot = da.dot(a);
      for (int u = 0; u < m; ++u) {
        const int j = st.unvisited[u];
        const double ds = a(u) * (da(u) - dot) * glimpse_scale;
        dq0.segment(hd * dh_cols, dh_cols) +=
            ds * tr.kg.row(j).segment(hd * dh_cols, dh_cols);
        dkg.row(j).segment(hd * dh_cols, dh_cols) +=
            ds * st.q0.segment(hd * dh_cols, dh_cols);
      }
    }
    // q0 = ctx * Wctx
    RowVec ctx(3 * d);
    ctx << graph, h.row(st.prev), h.row(first_node);
    g.wctx += ctx.transpose() * dq0;
    const RowVec dctx = dq0 * w.wctx.transpose();
    dgraph += dctx.segment(0, d);
    dh.row(st.prev) += dctx.segment(d, d);
    dh.row(first_node) += dctx.segment(2 * d, d);
  }

  dh += dkg * w.wkg.transpose() + dvg * w.wvg.transpose() +
        dkp * w.wkp.transpose();
  g.wkg += h.transpose() * dkg;
  g.wvg += h.transpose() * dvg;
  g.wkp += h.transpose() * dkp;
}

void backward_one(SolverPolicy& policy, const PolicyW& w, GradW& g,
                  const TspInstance& instance, std::span<const int> order,
                  double coef) {
  EncoderTrace etr;
  const EncodedInternal enc = encode_one(policy, w, instance, &etr);
  DecodeTrace dtr;
  decode_core(policy, w, instance, enc.h, enc.graph, DecodeMode::greedy,
              nullptr, order, &dtr);
  const int n = instance.n();
  Matrix dh = Matrix::Zero(n, policy.config.embed_dim);
  RowVec dgraph = RowVec::Zero(policy.config.embed_dim);
  decode_backward(policy, w, g, enc.h, enc.graph, dtr, order[0], coef, dh,
                  dgraph);
  dh.rowwise() += dgraph / static_cast<double>(n); // graph = column mean
  encoder_backward(policy, w, g, etr, std::move(dh));
}

void check_equal_sizes(std::span<const TspInstance> batch) {
  if (batch.empty()) throw InvalidArgumentError("empty instance batch");
  const int n = batch.front().n();
  for (const auto& inst : batch)
    if (inst.n() != n)
      throw InvalidArgumentError("mixed instance sizes in one batch");
}

} // namespace

void PolicyConfig::validate() const {
  if (embed_dim < 2 || num_layers < 1 || num_heads < 1 || ffn_dim < 1)
    throw InvalidArgumentError("policy config: dimensions must be positive");
  if (embed_dim % num_heads != 0)
    throw InvalidArgumentError("policy config: heads must divide embed_dim");
  if (!(logit_clip > 0.0))
    throw InvalidArgumentError("policy config: logit_clip must be > 0");
}

nlohmann::ordered_json PolicyConfig::to_json() const {
  nlohmann::ordered_json j;
  j["embed_dim"] = embed_dim;
  j["num_layers"] = num_layers;
  j["num_heads"] = num_heads;
  j["ffn_dim"] = ffn_dim;
  j["logit_clip"] = logit_clip;
  return j;
}

PolicyConfig PolicyConfig::from_json(const nlohmann::json& j) {
  PolicyConfig c;
  c.embed_dim = j.at("embed_dim").get<int>();
  c.num_layers = j.at("num_layers").get<int>();
  c.num_heads = j.at("num_heads").get<int>();
  c.ffn_dim = j.at("ffn_dim").get<int>();
  c.logit_clip = j.at("logit_clip").get<double>();
  c.validate();
  return c;
}

SolverPolicy SolverPolicy::create(const PolicyConfig& config,
                                  std::uint64_t seed) {
  config.validate();
  SolverPolicy p;
  p.config = config;
  const int d = config.embed_dim;
  const int f = config.ffn_dim;
  p.params.add("embed.w", 2, d);
  p.params.add("embed.bias", 1, d);
  for (int l = 0; l < config.num_layers; ++l) {
    p.params.add(enc_name(l, "wq"), d, d);
    p.params.add(enc_name(l, "wk"), d, d);
    p.params.add(enc_name(l, "wv"), d, d);
    p.params.add(enc_name(l, "wo"), d, d);
    p.params.add(enc_name(l, "ln1.gain"), 1, d);
    p.params.add(enc_name(l, "ln1.shift"), 1, d);
    p.params.add(enc_name(l, "ffn1.w"), d, f);
    p.params.add(enc_name(l, "ffn1.bias"), 1, f);
    p.params.add(enc_name(l, "ffn2.w"), f, d);
    p.params.add(enc_name(l, "ffn2.bias"), 1, d);
    p.params.add(enc_name(l, "ln2.gain"), 1, d);
    p.params.add(enc_name(l, "ln2.shift"), 1, d);
  }
  p.params.add("dec.wctx", 3 * d, d);
  p.params.add("dec.wkg", d, d);
  p.params.add("dec.wvg", d, d);
  p.params.add("dec.wog", d, d);
  p.params.add("dec.wkp", d, d);
  p.params.init_uniform(seed);
  return p;
}

std::vector<Encoded> encode(const SolverPolicy& policy,
                            std::span<const TspInstance> batch) {
  check_equal_sizes(batch);
  const PolicyW w = resolve_weights(policy);
  std::vector<Encoded> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) {
    EncodedInternal enc = encode_one(policy, w, inst, nullptr);
    out.push_back({std::move(enc.h), std::move(enc.graph)});
  }
  return out;
}

DecodeResult decode(const SolverPolicy& policy, const TspInstance& instance,
                    const Encoded& encoded, DecodeMode mode, Rng* rng) {
  if (mode == DecodeMode::sample && rng == nullptr)
    throw InvalidArgumentError("decode: sampling requires an Rng");
  const PolicyW w = resolve_weights(policy);
  return decode_core(policy, w, instance, encoded.node_embeddings,
                     encoded.graph_embedding, mode, rng, {}, nullptr);
}

std::vector<DecodeResult> greedy_decode(const SolverPolicy& policy,
                                        std::span<const TspInstance> batch) {
  check_equal_sizes(batch);
  const PolicyW w = resolve_weights(policy);
  std::vector<DecodeResult> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) {
    const EncodedInternal enc = encode_one(policy, w, inst, nullptr);
    out.push_back(decode_core(policy, w, inst, enc.h, enc.graph,
                              DecodeMode::greedy, nullptr, {}, nullptr));
  }
  return out;
}

std::vector<DecodeResult> sample_decode(const SolverPolicy& policy,
                                        std::span<const TspInstance> batch,
                                        Rng& rng) {
  check_equal_sizes(batch);
  const PolicyW w = resolve_weights(policy);
  std::vector<DecodeResult> out;
  out.reserve(batch.size());
  for (const auto& inst : batch) {
    const EncodedInternal enc = encode_one(policy, w, inst, nullptr);
    out.push_back(decode_core(policy, w, inst, enc.h, enc.graph,
                              DecodeMode::sample, &rng, {}, nullptr));
  }
  return out;
}

double log_probability(const SolverPolicy& policy, const TspInstance& instance,
                       std::span<const int> order) {
  if (!is_permutation_of_n(order, instance.n()))
    throw InvalidArgumentError("log_probability: not a permutation");
  const PolicyW w = resolve_weights(policy);
  const EncodedInternal enc = encode_one(policy, w, instance, nullptr);
  return decode_core(policy, w, instance, enc.h, enc.graph, DecodeMode::greedy,
                     nullptr, order, nullptr)
      .log_probability;
}

void accumulate_logprob_grad(SolverPolicy& policy, const TspInstance& instance,
                             std::span<const int> order, double coef) {
  if (!is_permutation_of_n(order, instance.n()))
    throw InvalidArgumentError("accumulate_logprob_grad: not a permutation");
  const PolicyW w = resolve_weights(policy);
  GradW g = resolve_grads(policy);
  backward_one(policy, w, g, instance, order, coef);
}

ReinforceStats reinforce_loss(SolverPolicy& policy,
                              const SolverPolicy& baseline,
                              std::span<const TspInstance> batch,
                              std::span<const double> weights,
                              std::uint64_t seed) {
  check_equal_sizes(batch);
  std::vector<double> baseline_costs;
  baseline_costs.reserve(batch.size());
  {
    const PolicyW bw = resolve_weights(baseline);
    for (const auto& inst : batch) {
      const EncodedInternal enc = encode_one(baseline, bw, inst, nullptr);
      baseline_costs.push_back(
          decode_core(baseline, bw, inst, enc.h, enc.graph, DecodeMode::greedy,
                      nullptr, {}, nullptr)
              .tour.length);
    }
  }
  return reinforce_loss_with_costs(policy, batch, baseline_costs, weights, seed);
}

ReinforceStats reinforce_loss_with_costs(SolverPolicy& policy,
                                         std::span<const TspInstance> batch,
                                         std::span<const double> baseline_costs,
                                         std::span<const double> weights,
                                         std::uint64_t seed) {
  check_equal_sizes(batch);
  const std::size_t b = batch.size();
  if (baseline_costs.size() != b)
    throw InvalidArgumentError("reinforce_loss: baseline cost count mismatch");
  if (!weights.empty() && weights.size() != b)
    throw InvalidArgumentError("reinforce_loss: weight count mismatch");

  policy.params.zero_grads();
  const PolicyW w = resolve_weights(policy);
  GradW g = resolve_grads(policy);

  Rng rng(seed);
  ReinforceStats stats;
  stats.sampled.reserve(b);
  for (const auto& inst : batch) {
    const EncodedInternal enc = encode_one(policy, w, inst, nullptr);
    stats.sampled.push_back(decode_core(policy, w, inst, enc.h, enc.graph,
                                        DecodeMode::sample, &rng, {}, nullptr));
  }
  stats.baseline_costs.assign(baseline_costs.begin(), baseline_costs.end());

  double loss = 0.0;
  double mean_adv = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double weight = weights.empty() ? 1.0 : weights[i];
    const double cost = stats.sampled[i].tour.length;
    const double logp = stats.sampled[i].log_probability;
    if (!std::isfinite(cost) || !std::isfinite(logp) ||
        !std::isfinite(stats.baseline_costs[i]))
      throw NumericalFailureError("reinforce_loss: non-finite value at batch index " +
                                  std::to_string(i));
    const double advantage = cost - stats.baseline_costs[i];
    loss += weight * cost;
    mean_adv += advantage;
    const double coef = weight * advantage / static_cast<double>(b);
    if (coef != 0.0)
      backward_one(policy, w, g, batch[i], stats.sampled[i].tour.order, coef);
  }
  stats.loss = loss / static_cast<double>(b);
  stats.mean_advantage = mean_adv / static_cast<double>(b);
  stats.grad_norm = policy.params.grad_norm();
  if (!std::isfinite(stats.grad_norm))
    throw NumericalFailureError("reinforce_loss: non-finite gradient");
  return stats;
}

double mean_greedy_cost(const SolverPolicy& policy,
                        std::span<const TspInstance> dataset) {
  if (dataset.empty())
    throw InvalidArgumentError("mean_greedy_cost: empty dataset");
  const PolicyW w = resolve_weights(policy);
  double total = 0.0;
  for (const auto& inst : dataset) {
    const EncodedInternal enc = encode_one(policy, w, inst, nullptr);
    total += decode_core(policy, w, inst, enc.h, enc.graph, DecodeMode::greedy,
                         nullptr, {}, nullptr)
                 .tour.length;
  }
  return total / static_cast<double>(dataset.size());
}

BaselineDecision maybe_update_baseline(const SolverPolicy& policy,
                                       RolloutBaseline& baseline,
                                       std::span<const TspInstance> validation) {
  BaselineDecision d;
  d.policy_cost = mean_greedy_cost(policy, validation);
  d.baseline_cost = mean_greedy_cost(baseline.policy, validation);
  if (d.policy_cost < d.baseline_cost) {
    baseline.policy = policy;
    baseline.validation_cost = d.policy_cost;
    d.replaced = true;
  }
  return d;
}

void save_policy(const std::filesystem::path& path, const SolverPolicy& policy,
                 std::int64_t epoch, const std::string& rng_state) {
  nlohmann::ordered_json hyper = policy.config.to_json();
  hyper["version"] = policy.version;
  save_checkpoint(path, "policy", hyper, epoch, rng_state, policy.params);
}

LoadedPolicy load_policy(const std::filesystem::path& path) {
  const CheckpointFile ckpt = load_checkpoint(path);
  if (ckpt.kind != "policy")
    throw ParseError("checkpoint kind is '" + ckpt.kind + "', expected policy");
  LoadedPolicy out{
      SolverPolicy::create(PolicyConfig::from_json(ckpt.hyperparameters), 0),
      ckpt.epoch, ckpt.rng_state};
  out.policy.version = ckpt.hyperparameters.value("version", out.policy.version);
  restore_params(ckpt, out.policy.params);
  return out;
}

} // namespace cogs
