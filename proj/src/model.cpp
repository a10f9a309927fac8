#include "explorer/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace explorer {

namespace {

void xavier(Param& p, Rng& rng) {
  const double limit = std::sqrt(6.0 / (p.value.rows() + p.value.cols()));
  for (size_t i = 0; i < p.value.size(); ++i) p.value.data()[i] = rng.uniform(-limit, limit);
}

std::vector<std::vector<int>> allowed_with_self(const std::vector<std::vector<int>>& adj) {
  std::vector<std::vector<int>> allowed(adj.size());
  for (size_t i = 0; i < adj.size(); ++i) {
    auto& a = allowed[i];
    a = adj[i];
    const int self = static_cast<int>(i);
    const auto it = std::lower_bound(a.begin(), a.end(), self);
    if (it == a.end() || *it != self) a.insert(it, self);
  }
  return allowed;
}

Matrix normalized_features(const std::vector<Coord>& nodes, const std::vector<double>& utility,
                           const std::vector<uint8_t>& flag, double utility_norm) {
  const int n = static_cast<int>(nodes.size());
  int min_x = nodes[0].x, max_x = nodes[0].x, min_y = nodes[0].y, max_y = nodes[0].y;
  for (const Coord c : nodes) {
    min_x = std::min(min_x, c.x);
    max_x = std::max(max_x, c.x);
    min_y = std::min(min_y, c.y);
    max_y = std::max(max_y, c.y);
  }
  const double ex = std::max(1, max_x - min_x);
  const double ey = std::max(1, max_y - min_y);
  Matrix f(n, 4);
  for (int i = 0; i < n; ++i) {
    f(i, 0) = (nodes[i].x - min_x) / ex;
    f(i, 1) = (nodes[i].y - min_y) / ey;
    f(i, 2) = utility[i] < 0.0 ? utility[i] : utility[i] / utility_norm;
    f(i, 3) = flag[i];
  }
  return f;
}

}  // namespace

NetworkParams::NetworkParams(const ModelConfig& config, HeadKind head_kind,
                             const std::string& prefix)
    : cfg(config), kind(head_kind) {
  const int d = cfg.d;
  const int ff = cfg.ff_hidden();
  input_w = Param(prefix + ".input.w", 4, d);
  input_b = Param(prefix + ".input.b", 1, d);
  layers.reserve(cfg.encoder_layers);
  for (int l = 0; l < cfg.encoder_layers; ++l) {
    const std::string lp = prefix + ".enc" + std::to_string(l);
    EncoderLayerParams layer;
    layer.ln1_g = Param(lp + ".ln1.g", 1, d);
    layer.ln1_b = Param(lp + ".ln1.b", 1, d);
    layer.wq = Param(lp + ".wq", d, d);
    layer.wk = Param(lp + ".wk", d, d);
    layer.wv = Param(lp + ".wv", d, d);
    layer.wo = Param(lp + ".wo", d, d);
    layer.wo_b = Param(lp + ".wo.b", 1, d);
    layer.ln2_g = Param(lp + ".ln2.g", 1, d);
    layer.ln2_b = Param(lp + ".ln2.b", 1, d);
    layer.ff1_w = Param(lp + ".ff1.w", d, ff);
    layer.ff1_b = Param(lp + ".ff1.b", 1, ff);
    layer.ff2_w = Param(lp + ".ff2.w", ff, d);
    layer.ff2_b = Param(lp + ".ff2.b", 1, d);
    layers.push_back(std::move(layer));
  }
  final_ln_g = Param(prefix + ".ln_out.g", 1, d);
  final_ln_b = Param(prefix + ".ln_out.b", 1, d);
  dec_wq = Param(prefix + ".dec.wq", d, d);
  dec_wk = Param(prefix + ".dec.wk", d, d);
  dec_wv = Param(prefix + ".dec.wv", d, d);
  dec_wo = Param(prefix + ".dec.wo", d, d);
  dec_wo_b = Param(prefix + ".dec.wo.b", 1, d);
  concat_w = Param(prefix + ".concat.w", 2 * d, d);
  concat_b = Param(prefix + ".concat.b", 1, d);
  if (kind == HeadKind::Policy) {
    ptr_q = Param(prefix + ".ptr.q", d, d);
    ptr_k = Param(prefix + ".ptr.k", d, d);
  } else {
    head_w = Param(prefix + ".qhead.w", 2 * d, 1);
    head_b = Param(prefix + ".qhead.b", 1, 1);
  }
}

void NetworkParams::init_xavier(Rng& rng) {
  for_each([&rng](Param& p) {
    if (p.name.find(".ln") != std::string::npos) {
      const bool is_gain = p.name.back() == 'g';
      p.value.fill(is_gain ? 1.0 : 0.0);
    } else if (p.name.ends_with(".b")) {
      p.value.zero();
    } else {
      xavier(p, rng);
    }
  });
}

void NetworkParams::for_each(const std::function<void(Param&)>& fn) {
  fn(input_w);
  fn(input_b);
  for (auto& l : layers) {
    fn(l.ln1_g);
    fn(l.ln1_b);
    fn(l.wq);
    fn(l.wk);
    fn(l.wv);
    fn(l.wo);
    fn(l.wo_b);
    fn(l.ln2_g);
    fn(l.ln2_b);
    fn(l.ff1_w);
    fn(l.ff1_b);
    fn(l.ff2_w);
    fn(l.ff2_b);
  }
  fn(final_ln_g);
  fn(final_ln_b);
  fn(dec_wq);
  fn(dec_wk);
  fn(dec_wv);
  fn(dec_wo);
  fn(dec_wo_b);
  fn(concat_w);
  fn(concat_b);
  if (kind == HeadKind::Policy) {
    fn(ptr_q);
    fn(ptr_k);
  } else {
    fn(head_w);
    fn(head_b);
  }
}

void NetworkParams::for_each(const std::function<void(const Param&)>& fn) const {
  const_cast<NetworkParams*>(this)->for_each([&fn](Param& p) { fn(p); });
}

size_t NetworkParams::param_count() const {
  size_t n = 0;
  for_each([&n](const Param& p) { n += p.value.size(); });
  return n;
}

void NetworkParams::zero_grads() {
  for_each([](Param& p) { p.zero_grad(); });
}

void NetworkParams::copy_values_from(const NetworkParams& other) {
  std::vector<const Param*> src;
  other.for_each([&src](const Param& p) { src.push_back(&p); });
  size_t i = 0;
  for_each([&](Param& p) {
    assert(i < src.size() && p.value.same_shape(src[i]->value));
    p.value = src[i]->value;
    ++i;
  });
  assert(i == src.size());
}

FeatureGraph make_policy_input(const InformativeGraph& g, double utility_norm) {
  FeatureGraph fg;
  fg.features = normalized_features(g.nodes, g.utility, g.guidepost, utility_norm);
  fg.allowed = allowed_with_self(g.adj);
  fg.current = g.current_index;
  fg.neighbors = g.adj[g.current_index];
  return fg;
}

FeatureGraph make_critic_input(const GroundTruthGraph& g, double utility_norm) {
  FeatureGraph fg;
  fg.features = normalized_features(g.nodes, g.utility, g.explored, utility_norm);
  fg.allowed = allowed_with_self(g.adj);
  fg.current = g.current_index;
  fg.neighbors = g.adj[g.current_index];
  return fg;
}

FeatureGraph make_critic_input(const InformativeGraph& g, double utility_norm) {
  return make_policy_input(g, utility_norm);
}

Tape::Ref encode(Tape& tape, const NetworkParams& params, const FeatureGraph& input) {
  auto& p = const_cast<NetworkParams&>(params);
  Tape::Ref h = tape.add_row(tape.matmul(tape.constant(input.features), tape.param(p.input_w)),
                             tape.param(p.input_b));
  for (auto& layer : p.layers) {
    const Tape::Ref xn = tape.layer_norm(h, tape.param(layer.ln1_g), tape.param(layer.ln1_b));
    const Tape::Ref q = tape.matmul(xn, tape.param(layer.wq));
    const Tape::Ref k = tape.matmul(xn, tape.param(layer.wk));
    const Tape::Ref v = tape.matmul(xn, tape.param(layer.wv));
    const Tape::Ref att = tape.masked_attention(q, k, v, input.allowed, params.cfg.heads);
    h = tape.add(h, tape.add_row(tape.matmul(att, tape.param(layer.wo)), tape.param(layer.wo_b)));
    const Tape::Ref yn = tape.layer_norm(h, tape.param(layer.ln2_g), tape.param(layer.ln2_b));
    const Tape::Ref ff1 =
        tape.gelu(tape.add_row(tape.matmul(yn, tape.param(layer.ff1_w)), tape.param(layer.ff1_b)));
    const Tape::Ref ff2 =
        tape.add_row(tape.matmul(ff1, tape.param(layer.ff2_w)), tape.param(layer.ff2_b));
    h = tape.add(h, ff2);
  }
  // Pre-norm stacks leave the residual stream unnormalized; without this the
  // pointer tanh saturates and its gradients vanish.
  return tape.layer_norm(h, tape.param(p.final_ln_g), tape.param(p.final_ln_b));
}

namespace {

// Shared decoder trunk: global-graph attention from the current node's
// feature, concat + projection to h*.
Tape::Ref decode_state(Tape& tape, NetworkParams& p, const FeatureGraph& input, Tape::Ref h,
                       AttentionDump* attention) {
  const int n = tape.value(h).rows();
  const Tape::Ref hc = tape.gather_rows(h, {input.current});
  const Tape::Ref q = tape.matmul(hc, tape.param(p.dec_wq));
  const Tape::Ref k = tape.matmul(h, tape.param(p.dec_wk));
  const Tape::Ref v = tape.matmul(h, tape.param(p.dec_wv));
  std::vector<int> all(n);
  for (int i = 0; i < n; ++i) all[i] = i;
  const std::vector<std::vector<int>> full{all};
  const Tape::Ref att = tape.masked_attention(q, k, v, full, p.cfg.heads, attention);
  const Tape::Ref att_o =
      tape.add_row(tape.matmul(att, tape.param(p.dec_wo)), tape.param(p.dec_wo_b));
  const Tape::Ref cat = tape.concat_cols(hc, att_o);
  return tape.add_row(tape.matmul(cat, tape.param(p.concat_w)), tape.param(p.concat_b));
}

}  // namespace

PolicyRefs policy_forward(Tape& tape, const NetworkParams& params, const FeatureGraph& input,
                          AttentionDump* attention) {
  if (input.neighbors.empty()) {
    throw std::runtime_error("policy_forward: current node has no neighbors");
  }
  assert(params.kind == HeadKind::Policy);
  auto& p = const_cast<NetworkParams&>(params);
  const Tape::Ref h = encode(tape, params, input);
  const Tape::Ref hstar = decode_state(tape, p, input, h, attention);

  const Tape::Ref qp = tape.matmul(hstar, tape.param(p.ptr_q));
  const Tape::Ref kp = tape.matmul(tape.gather_rows(h, input.neighbors), tape.param(p.ptr_k));
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(params.cfg.d));
  const Tape::Ref scores =
      tape.scale(tape.tanh_op(tape.scale(tape.matmul_nt(qp, kp), inv_sqrt_d)),
                 params.cfg.pointer_clip);
  PolicyRefs out;
  out.probs = tape.softmax_row(scores);
  out.log_probs = tape.log_softmax_row(scores);
  return out;
}

Tape::Ref critic_forward(Tape& tape, const NetworkParams& params, const FeatureGraph& input,
                         const std::vector<int>& action_nodes) {
  if (action_nodes.empty()) {
    throw std::runtime_error("critic_forward: empty action set");
  }
  assert(params.kind == HeadKind::Critic);
  auto& p = const_cast<NetworkParams&>(params);
  const Tape::Ref h = encode(tape, params, input);
  const Tape::Ref hstar = decode_state(tape, p, input, h, nullptr);

  const Tape::Ref hn = tape.gather_rows(h, action_nodes);
  const Tape::Ref rep = tape.repeat_row(hstar, static_cast<int>(action_nodes.size()));
  const Tape::Ref cat = tape.concat_cols(rep, hn);
  return tape.add_row(tape.matmul(cat, tape.param(p.head_w)), tape.param(p.head_b));
}

Matrix policy_probabilities(const NetworkParams& params, const FeatureGraph& input,
                            AttentionDump* attention) {
  Tape tape;
  const PolicyRefs refs = policy_forward(tape, params, input, attention);
  return tape.value(refs.probs);
}

Matrix critic_values(const NetworkParams& params, const FeatureGraph& input,
                     const std::vector<int>& action_nodes) {
  Tape tape;
  return tape.value(critic_forward(tape, params, input, action_nodes));
}

Matrix masked_attention(const Matrix& h_q, const Matrix& h_kv, const Matrix& mask,
                        const Matrix& wq, const Matrix& wk, const Matrix& wv, const Matrix& wo,
                        int heads, std::vector<Matrix>* weights_out) {
  assert(mask.rows() == h_q.rows() && mask.cols() == h_kv.rows());
  std::vector<std::vector<int>> allowed(h_q.rows());
  for (int i = 0; i < mask.rows(); ++i) {
    for (int j = 0; j < mask.cols(); ++j) {
      if (mask(i, j) == 0.0) allowed[i].push_back(j);
    }
  }
  Tape tape;
  const Tape::Ref q = tape.matmul(tape.constant(h_q), tape.constant(wq));
  const Tape::Ref k = tape.matmul(tape.constant(h_kv), tape.constant(wk));
  const Tape::Ref v = tape.matmul(tape.constant(h_kv), tape.constant(wv));
  const Tape::Ref att = tape.masked_attention(q, k, v, allowed, heads, weights_out);
  return tape.value(tape.matmul(att, tape.constant(wo)));
}

void write_tensor_block(const NetworkParams& params, std::ostream& manifest, std::ostream& bin) {
  params.for_each([&](const Param& p) {
    manifest << "tensor " << p.name << ' ' << p.value.rows() << ' ' << p.value.cols() << '\n';
    for (const Matrix* m : {&p.value, &p.m, &p.v}) {
      bin.write(reinterpret_cast<const char*>(m->data()),
                static_cast<std::streamsize>(m->size() * sizeof(double)));
    }
  });
}

void read_tensor_block(NetworkParams& params, std::istream& manifest, std::istream& bin) {
  params.for_each([&](Param& p) {
    std::string tag, name;
    int rows = 0, cols = 0;
    if (!(manifest >> tag >> name >> rows >> cols) || tag != "tensor") {
      throw std::runtime_error("checkpoint manifest truncated at " + p.name);
    }
    if (name != p.name || rows != p.value.rows() || cols != p.value.cols()) {
      throw std::runtime_error("checkpoint shape mismatch: expected " + p.name + " " +
                               std::to_string(p.value.rows()) + "x" +
                               std::to_string(p.value.cols()) + ", found " + name + " " +
                               std::to_string(rows) + "x" + std::to_string(cols));
    }
    for (Matrix* m : {&p.value, &p.m, &p.v}) {
      bin.read(reinterpret_cast<char*>(m->data()),
               static_cast<std::streamsize>(m->size() * sizeof(double)));
      if (!bin) throw std::runtime_error("checkpoint binary truncated at " + p.name);
    }
  });
}

}  // namespace explorer
