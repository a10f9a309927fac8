#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "explorer/graph.hpp"
#include "explorer/rng.hpp"
#include "explorer/tape.hpp"

namespace explorer {

struct ModelConfig {
  int d = 128;
  int heads = 8;
  int encoder_layers = 6;
  int ff_mult = 4;
  double pointer_clip = 10.0;

  int ff_hidden() const { return d * ff_mult; }
};

enum class HeadKind { Policy, Critic };

struct EncoderLayerParams {
  Param ln1_g, ln1_b;
  Param wq, wk, wv;
  Param wo, wo_b;
  Param ln2_g, ln2_b;
  Param ff1_w, ff1_b, ff2_w, ff2_b;
};

// All learnables of one network: 4->d input projection, encoder stack,
// decoder global-attention layer, 2d->d concat projection, then either the
// pointer layer (policy) or the per-action value head (critic).
struct NetworkParams {
  ModelConfig cfg;
  HeadKind kind = HeadKind::Policy;

  Param input_w, input_b;
  std::vector<EncoderLayerParams> layers;
  Param final_ln_g, final_ln_b;  // closes the pre-norm stack
  Param dec_wq, dec_wk, dec_wv, dec_wo, dec_wo_b;
  Param concat_w, concat_b;
  Param ptr_q, ptr_k;    // policy head
  Param head_w, head_b;  // critic head

  NetworkParams() = default;
  NetworkParams(const ModelConfig& config, HeadKind head_kind, const std::string& prefix);

  void init_xavier(Rng& rng);
  void for_each(const std::function<void(Param&)>& fn);
  void for_each(const std::function<void(const Param&)>& fn) const;
  size_t param_count() const;
  void zero_grads();
  // Copies values only (target-network sync).
  void copy_values_from(const NetworkParams& other);
};

// Network-ready view of a graph: normalized features, per-node attention
// lists (graph neighbors + self), current node, action candidates.
struct FeatureGraph {
  Matrix features;  // n x 4
  std::vector<std::vector<int>> allowed;
  int current = 0;
  std::vector<int> neighbors;  // action set, ascending node order
};

// (x,y) scaled into [0,1] over the graph bounding box, utility / utility_norm
// (the -1 unexplored sentinel is kept raw), flags raw.
FeatureGraph make_policy_input(const InformativeGraph& g, double utility_norm);
FeatureGraph make_critic_input(const GroundTruthGraph& g, double utility_norm);
// Ablation critic: the critic reads the policy's informative-graph view.
FeatureGraph make_critic_input(const InformativeGraph& g, double utility_norm);

struct PolicyRefs {
  Tape::Ref probs = -1;
  Tape::Ref log_probs = -1;
};

// Decoder attention dump: one row-vector of weights over nodes per head.
using AttentionDump = std::vector<Matrix>;

// Six masked self-attention layers over the node features; rows follow node
// order.
Tape::Ref encode(Tape& tape, const NetworkParams& params, const FeatureGraph& input);

// Full policy pass: encoder, global-attention decoder, pointer layer over
// the current node's neighbors. Throws if the neighbor set is empty.
PolicyRefs policy_forward(Tape& tape, const NetworkParams& params, const FeatureGraph& input,
                          AttentionDump* attention = nullptr);

// Critic pass: same trunk, linear head -> one Q value per action (n_act x 1).
// action_nodes are the graph-node indices aligned with the policy's action
// order.
Tape::Ref critic_forward(Tape& tape, const NetworkParams& params, const FeatureGraph& input,
                         const std::vector<int>& action_nodes);

// Convenience inference wrappers (fresh tape per call).
Matrix policy_probabilities(const NetworkParams& params, const FeatureGraph& input,
                            AttentionDump* attention = nullptr);
Matrix critic_values(const NetworkParams& params, const FeatureGraph& input,
                     const std::vector<int>& action_nodes);

// Spec-level masked attention entry: h_q [n_q x d], h_kv [n_kv x d], mask
// [n_q x n_kv] with 1 = masked. Multi-head QKV + output projection; optional
// per-head weight matrices. Throws on an all-masked query row.
Matrix masked_attention(const Matrix& h_q, const Matrix& h_kv, const Matrix& mask,
                        const Matrix& wq, const Matrix& wk, const Matrix& wv, const Matrix& wo,
                        int heads, std::vector<Matrix>* weights_out = nullptr);

// Checkpoint tensor blocks: "tensor <name> <rows> <cols>" manifest lines plus
// row-major little-endian doubles appended to the binary stream, in for_each
// order (values, then Adam m, then Adam v). Loading rejects name/shape
// mismatches.
void write_tensor_block(const NetworkParams& params, std::ostream& manifest, std::ostream& bin);
void read_tensor_block(NetworkParams& params, std::istream& manifest, std::istream& bin);

}  // namespace explorer
