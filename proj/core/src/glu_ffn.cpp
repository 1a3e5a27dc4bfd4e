// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/glu_ffn.hpp"

#include <cctype>
#include <cmath>
#include <optional>
#include <string>
#include <utility>

#include <fmt/format.h>

#include "sparseglu/error.hpp"

namespace sparseglu {
namespace {

std::string normalize(std::string_view text) {
  std::string key;
  for (char c : text) {
    if (c != '-' && c != '_') key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return key;
}

void check_input(std::span<const float> x, const FfnWeights& w) {
  if (x.size() != w.hidden_dim()) {
    throw ShapeError("ffn: input has " + std::to_string(x.size()) + " entries, hidden dim is " +
                     std::to_string(w.hidden_dim()));
  }
}

void activate_inplace(Activation a, std::span<float> v) {
  for (float& z : v) z = activate(a, z);
}

}  // namespace

std::string_view to_string(Activation a) noexcept {
  return a == Activation::SiLU ? "silu" : "gelu";
}

Activation parse_activation(std::string_view text) {
  const auto key = normalize(text);
  if (key == "silu" || key == "swish") return Activation::SiLU;
  if (key == "gelu") return Activation::GELU;
  throw ConfigError("unknown activation '" + std::string(text) + "' (expected silu or gelu)");
}

float activate(Activation a, float z) noexcept {
  if (a == Activation::SiLU) return z * (1.0f / (1.0f + std::exp(-z)));
  return 0.5f * z * (1.0f + std::erf(z * 0.70710678118654752f));
}

std::string_view to_string(ActivationSite s) noexcept {
  switch (s) {
    case ActivationSite::Input: return "input";
    case ActivationSite::UpProjection: return "up";
    case ActivationSite::Gate: return "gate";
    case ActivationSite::Intermediate: return "intermediate";
  }
  return "?";
}

ActivationSite parse_site(std::string_view text) {
  const auto key = normalize(text);
  if (key == "input" || key == "x") return ActivationSite::Input;
  if (key == "up" || key == "u" || key == "upprojection" || key == "upp") return ActivationSite::UpProjection;
  if (key == "gate" || key == "g") return ActivationSite::Gate;
  if (key == "intermediate" || key == "inter" || key == "i") return ActivationSite::Intermediate;
  throw ConfigError("unknown activation site '" + std::string(text) +
                    "' (expected input, up, gate or intermediate)");
}

void FfnWeights::validate() const {
  if (w_up.rank() != 2 || w_gate.rank() != 2 || w_down.rank() != 2) {
    throw ShapeError("ffn weights must be matrices");
  }
  const auto d = w_up.rows();
  const auto h = w_up.cols();
  if (w_gate.rows() != d || w_gate.cols() != h) {
    throw ShapeError("ffn: w_gate '" + w_gate.name() + "' must be [" + std::to_string(d) + " x " +
                     std::to_string(h) + "] like w_up");
  }
  if (w_down.rows() != h || w_down.cols() != d) {
    throw ShapeError("ffn: w_down '" + w_down.name() + "' must be [" + std::to_string(h) + " x " +
                     std::to_string(d) + "]");
  }
  if (!w_up.all_finite() || !w_gate.all_finite() || !w_down.all_finite()) {
    throw InputError("ffn: non-finite weight");
  }
}

FfnWeights ffn_from_tensors(std::vector<Tensor> tensors, Activation activation) {
  constexpr std::string_view kUp = "ffn.w_up", kGate = "ffn.w_gate", kDown = "ffn.w_down";
  std::optional<Tensor> up, gate, down;
  for (auto& t : tensors) {
    std::optional<Tensor>* slot = t.name() == kUp ? &up : t.name() == kGate ? &gate : t.name() == kDown ? &down : nullptr;
    if (slot == nullptr) throw SchemaError("ffn container: unexpected tensor '" + t.name() + "'");
    if (slot->has_value()) throw SchemaError("ffn container: duplicate tensor '" + t.name() + "'");
    *slot = std::move(t);
  }
  for (const auto& [slot, name] : {std::pair{&up, kUp}, {&gate, kGate}, {&down, kDown}}) {
    if (!slot->has_value()) throw SchemaError("ffn container: missing tensor '" + std::string(name) + "'");
    if ((*slot)->rank() != 2) throw SchemaError("ffn container: tensor '" + std::string(name) + "' must be a matrix");
  }
  const auto h = down->rows();
  const auto d = down->cols();
  for (const Tensor* t : {&*up, &*gate}) {
    if (t->rows() != d || t->cols() != h) {
      throw SchemaError(fmt::format("ffn container: tensor '{}' has shape [{} x {}], expected [{} x {}]", t->name(),
                                    t->rows(), t->cols(), d, h));
    }
  }
  FfnWeights w{std::move(*up), std::move(*gate), std::move(*down), activation};
  w.validate();
  return w;
}

std::vector<Tensor> ffn_to_tensors(const FfnWeights& w) {
  w.validate();
  std::vector<Tensor> out{w.w_up, w.w_gate, w.w_down};
  out[0].set_name("ffn.w_up");
  out[1].set_name("ffn.w_gate");
  out[2].set_name("ffn.w_down");
  return out;
}

std::size_t activation_length(const FfnWeights& w, ActivationSite site) {
  return site == ActivationSite::Input ? w.hidden_dim() : w.intermediate_dim();
}

std::vector<float> ffn_dense(std::span<const float> x, const FfnWeights& w, KernelCounters* counters) {
  check_input(x, w);
  auto u = gemv(MatrixView(w.w_up), x, counters);
  auto g = gemv(MatrixView(w.w_gate), x, counters);
  activate_inplace(w.activation, g);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] *= g[j];
  return gemv(MatrixView(w.w_down), u, counters);
}

SparseFfnResult ffn_sparsified(std::span<const float> x, const FfnWeights& w, ActivationSite site,
                               const SparsifyRule& rule, KernelCounters* counters) {
  check_input(x, w);
  const MatrixView up(w.w_up);
  const MatrixView gate(w.w_gate);
  const MatrixView down(w.w_down);
  SparseFfnResult result;
  result.trace.site = site;

  std::vector<float> inter;
  switch (site) {
    case ActivationSite::Input: {
      result.trace.mask = make_mask(x, rule);
      auto u = gemv_skip_cols(up, x, result.trace.mask, counters);
      auto g = gemv_skip_cols(gate, x, result.trace.mask, counters);
      activate_inplace(w.activation, g);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] *= g[j];
      result.output = gemv(down, u, counters);
      break;
    }
    case ActivationSite::Gate: {
      auto g = gemv(gate, x, counters);
      activate_inplace(w.activation, g);
      result.trace.mask = make_mask(g, rule);
      auto u = gemv_skip_rows(up, x, result.trace.mask, counters);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] = result.trace.mask.kept(j) ? u[j] * g[j] : 0.0f;
      result.output = gemv_skip_cols(down, u, result.trace.mask, counters);
      break;
    }
    case ActivationSite::UpProjection: {
      auto u = gemv(up, x, counters);
      result.trace.mask = make_mask(u, rule);
      auto g = gemv_skip_rows(gate, x, result.trace.mask, counters);
      for (std::size_t j = 0; j < u.size(); ++j) {
        u[j] = result.trace.mask.kept(j) ? u[j] * activate(w.activation, g[j]) : 0.0f;
      }
      result.output = gemv_skip_cols(down, u, result.trace.mask, counters);
      break;
    }
    case ActivationSite::Intermediate: {
      auto u = gemv(up, x, counters);
      auto g = gemv(gate, x, counters);
      activate_inplace(w.activation, g);
      for (std::size_t j = 0; j < u.size(); ++j) u[j] *= g[j];
      result.trace.mask = make_mask(u, rule);
      result.output = gemv_skip_cols(down, u, result.trace.mask, counters);
      break;
    }
  }
  result.trace.induced_sparsity = induced_sparsity(result.trace.mask);
  return result;
}

std::vector<float> ffn_with_intermediate_mask(std::span<const float> x, const FfnWeights& w,
                                              const SparsityMask& mask, KernelCounters* counters) {
  check_input(x, w);
  auto u = gemv_skip_rows(MatrixView(w.w_up), x, mask, counters);
  auto g = gemv_skip_rows(MatrixView(w.w_gate), x, mask, counters);
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = mask.kept(j) ? u[j] * activate(w.activation, g[j]) : 0.0f;
  return gemv_skip_cols(MatrixView(w.w_down), u, mask, counters);
}

}  // namespace sparseglu
