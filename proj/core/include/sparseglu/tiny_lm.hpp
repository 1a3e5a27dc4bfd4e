// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sparseglu/glu_ffn.hpp"
#include "sparseglu/sparsify.hpp"
#include "sparseglu/tensor.hpp"

namespace sparseglu {

using Token = std::uint32_t;

/// Byte-level tokenizer: token id == byte value.
std::vector<Token> byte_tokenize(std::string_view bytes);
std::vector<Token> byte_tokenize(std::span<const std::uint8_t> bytes);
/// Throws InputError for ids above 255.
std::string detokenize(std::span<const Token> tokens);

struct ModelManifest {
  std::size_t n_layers = 1;
  std::size_t hidden_dim = 32;
  std::size_t intermediate_dim = 96;
  std::size_t n_heads = 4;
  std::size_t vocab_size = 256;
  Activation activation = Activation::SiLU;
  float norm_eps = 1e-5f;
  std::size_t max_seq_len = 128;

  std::size_t head_dim() const noexcept { return hidden_dim / n_heads; }
  /// Throws ConfigError naming the offending field(s).
  void validate() const;
};

/// Parses the manifest JSON document. Field names: n_layers, hidden_dim, intermediate_dim,
/// n_heads, vocab_size, activation ("silu"|"gelu"), norm_eps, max_seq_len.
ModelManifest parse_manifest(std::string_view json_text);
std::string manifest_to_json(const ModelManifest& m);
ModelManifest read_manifest_file(const std::filesystem::path& path);

struct TensorSpec {
  std::string name;
  std::vector<std::uint64_t> dims;
};

/// The container layout for a manifest, in canonical order:
///   embed.tokens [V x h], embed.positions [S x h],
///   layers.{i}.attn_norm.weight [h], layers.{i}.attn.w_{q,k,v,o} [h x h],
///   layers.{i}.ffn_norm.weight [h], layers.{i}.ffn.w_up [d x h], layers.{i}.ffn.w_gate [d x h],
///   layers.{i}.ffn.w_down [h x d], final_norm.weight [h], lm_head [V x h].
std::vector<TensorSpec> model_tensor_schema(const ModelManifest& m);

/// Deterministic synthetic weights. Projections are N(0, 1/in_dim); norm gains are 1;
/// position embeddings are 0.1 * N(0,1); lm_head starts as a copy of embed.tokens.
std::vector<Tensor> generate_weights(const ModelManifest& m, std::uint64_t seed);

struct LayerWeights {
  Tensor attn_norm;
  Tensor w_q;
  Tensor w_k;
  Tensor w_v;
  Tensor w_o;
  Tensor ffn_norm;
  FfnWeights ffn;
};

/// Decoder-only pre-norm transformer with causal multi-head attention, learned absolute
/// positions, RMSNorm and a GLU FFN. Immutable after construction.
class TinyLm {
 public:
  /// Throws SchemaError naming the first missing, unexpected or mis-shaped tensor.
  static TinyLm from_tensors(const ModelManifest& manifest, std::vector<Tensor> tensors);
  static TinyLm load(const std::filesystem::path& manifest_path,
                     const std::filesystem::path& container_path);

  const ModelManifest& manifest() const noexcept { return manifest_; }
  const Tensor& token_embedding() const noexcept { return tok_emb_; }
  const Tensor& position_embedding() const noexcept { return pos_emb_; }
  const LayerWeights& layer(std::size_t i) const { return layers_.at(i); }
  const Tensor& final_norm() const noexcept { return final_norm_; }
  const Tensor& lm_head() const noexcept { return lm_head_; }

  /// Tensors in schema order.
  std::vector<Tensor> tensors() const;

 private:
  ModelManifest manifest_;
  Tensor tok_emb_;
  Tensor pos_emb_;
  std::vector<LayerWeights> layers_;
  Tensor final_norm_;
  Tensor lm_head_;
};

struct SparsifySpec {
  ActivationSite site = ActivationSite::Intermediate;
  SparsifyRule rule;
};

struct ForwardHooks {
  /// Called for every (layer, position) FFN evaluation under a sparsify spec.
  std::function<void(std::size_t layer, std::size_t position, const FfnTrace&)> on_mask;
  /// Called with the normalized FFN input of every (layer, position).
  std::function<void(std::size_t layer, std::size_t position, std::span<const float>)> on_ffn_input;
  /// Called with the final normalized hidden state of every position (the lm_head input).
  std::function<void(std::size_t position, std::span<const float>)> on_final_hidden;
};

struct Logits {
  std::size_t rows = 0;  // sequence positions
  std::size_t cols = 0;  // vocabulary
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const { return std::span<const float>(values).subspan(i * cols, cols); }
};

/// With `sparsify` set, every layer's FFN runs ffn_sparsified independently per position.
/// Throws InputError for out-of-range tokens or sequences longer than max_seq_len.
Logits forward_logits(const TinyLm& model, std::span<const Token> tokens,
                      const std::optional<SparsifySpec>& sparsify = std::nullopt,
                      const ForwardHooks* hooks = nullptr);

/// Replaces lm_head with a ridge-regression readout from final hidden states to one-hot
/// next tokens over `tokens`, scaled by the factor (searched on a log grid) that minimizes
/// cross-entropy on the same corpus. Returns the full tensor set in schema order.
std::vector<Tensor> fit_output_head(const TinyLm& model, std::span<const Token> tokens, double ridge = 1e-2);

struct EvalReport {
  double cross_entropy = 0.0;  // nats per predicted token
  double top1_accuracy = 0.0;
  double avg_induced_sparsity = 0.0;
  std::vector<double> per_layer_sparsity;
  std::uint64_t tokens_evaluated = 0;
  std::uint64_t mask_evaluations = 0;
};

struct EvalOptions {
  unsigned threads = 1;
};

/// Windows [begin, end) covering a corpus longer than max_seq_len. Consecutive windows
/// overlap by one token so every position after the first is predicted exactly once.
std::vector<std::pair<std::size_t, std::size_t>> eval_windows(std::size_t n_tokens, std::size_t max_seq_len);

/// Teacher-forced next-token cross-entropy and greedy top-1 accuracy (ties go to the lowest
/// token id). Sparsity is the dropped fraction over all (position, layer) masks.
/// Windows run concurrently when threads > 1; reduction happens in window order.
EvalReport eval_metrics(const TinyLm& model, std::span<const Token> tokens,
                        const std::optional<SparsifySpec>& sparsify, const EvalOptions& options = {});

}  // namespace sparseglu
