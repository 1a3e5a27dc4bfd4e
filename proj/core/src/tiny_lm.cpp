// Copyright (C) 2026 The sparseglu Authors
// SPDX-License-Identifier: Apache-2.0

#include "sparseglu/tiny_lm.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sparseglu/container.hpp"
#include "sparseglu/error.hpp"
#include "sparseglu/random.hpp"

namespace sparseglu {
namespace {

using json = nlohmann::json;

std::string layer_name(std::size_t i, std::string_view suffix) {
  return "layers." + std::to_string(i) + "." + std::string(suffix);
}

template <typename T>
T manifest_field(const json& doc, const char* field) {
  if (!doc.contains(field)) throw ConfigError(std::string("manifest: missing field '") + field + "'");
  try {
    return doc.at(field).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("manifest: field '") + field + "' has the wrong type");
  }
}

std::size_t positive_field(const json& doc, const char* field) {
  const auto& v = doc.contains(field) ? doc.at(field) : json();
  if (v.is_null()) throw ConfigError(std::string("manifest: missing field '") + field + "'");
  if (!v.is_number_integer() || v.get<std::int64_t>() <= 0) {
    throw ConfigError(std::string("manifest: field '") + field + "' must be a positive integer");
  }
  return v.get<std::size_t>();
}

void rms_norm(std::span<const float> x, std::span<const float> gain, float eps, std::span<float> out) {
  float sum_sq = 0.0f;
  for (float v : x) sum_sq += v * v;
  const float inv = 1.0f / std::sqrt(sum_sq / static_cast<float>(x.size()) + eps);
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] * inv * gain[i];
}

struct WindowStats {
  double ce_sum = 0.0;
  std::uint64_t correct = 0;
  std::uint64_t predictions = 0;
  std::vector<std::uint64_t> dropped;  // per layer
  std::vector<std::uint64_t> entries;  // per layer
  std::uint64_t masks = 0;
};

WindowStats eval_window(const TinyLm& model, std::span<const Token> tokens,
                        const std::optional<SparsifySpec>& sparsify) {
  const auto layers = model.manifest().n_layers;
  WindowStats st;
  st.dropped.assign(layers, 0);
  st.entries.assign(layers, 0);

  ForwardHooks hooks;
  hooks.on_mask = [&](std::size_t layer, std::size_t, const FfnTrace& trace) {
    st.dropped[layer] += trace.mask.size() - trace.mask.kept_count();
    st.entries[layer] += trace.mask.size();
    ++st.masks;
  };
  const auto logits = forward_logits(model, tokens, sparsify, &hooks);

  for (std::size_t t = 0; t + 1 < tokens.size(); ++t) {
    const auto row = logits.row(t);
    const Token target = tokens[t + 1];
    std::size_t best = 0;
    float peak = row[0];
    for (std::size_t v = 1; v < row.size(); ++v) {
      if (row[v] > peak) {
        peak = row[v];
        best = v;
      }
    }
    double sum = 0.0;
    for (float z : row) sum += std::exp(static_cast<double>(z) - static_cast<double>(peak));
    st.ce_sum += std::log(sum) + static_cast<double>(peak) - static_cast<double>(row[target]);
    st.correct += best == target ? 1 : 0;
    ++st.predictions;
  }
  return st;
}

}  // namespace

std::vector<Token> byte_tokenize(std::string_view bytes) {
  std::vector<Token> out;
  out.reserve(bytes.size());
  for (char c : bytes) out.push_back(static_cast<unsigned char>(c));
  return out;
}

std::vector<Token> byte_tokenize(std::span<const std::uint8_t> bytes) {
  return {bytes.begin(), bytes.end()};
}

std::string detokenize(std::span<const Token> tokens) {
  std::string out;
  out.reserve(tokens.size());
  for (auto t : tokens) {
    if (t > 255) throw InputError("detokenize: token id " + std::to_string(t) + " is not a byte");
    out.push_back(static_cast<char>(t));
  }
  return out;
}

void ModelManifest::validate() const {
  if (n_layers == 0) throw ConfigError("manifest: n_layers must be positive");
  if (hidden_dim == 0) throw ConfigError("manifest: hidden_dim must be positive");
  if (intermediate_dim == 0) throw ConfigError("manifest: intermediate_dim must be positive");
  if (n_heads == 0) throw ConfigError("manifest: n_heads must be positive");
  if (max_seq_len == 0) throw ConfigError("manifest: max_seq_len must be positive");
  if (vocab_size < 2) throw ConfigError("manifest: vocab_size must be at least 2");
  if (hidden_dim % n_heads != 0) {
    throw ConfigError("manifest: n_heads (" + std::to_string(n_heads) + ") does not divide hidden_dim (" +
                      std::to_string(hidden_dim) + ")");
  }
  if (!(norm_eps > 0.0f) || !std::isfinite(norm_eps)) {
    throw ConfigError("manifest: norm_eps must be a positive finite number");
  }
}

ModelManifest parse_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("manifest: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("manifest: top level must be a JSON object");
  ModelManifest m;
  m.n_layers = positive_field(doc, "n_layers");
  m.hidden_dim = positive_field(doc, "hidden_dim");
  m.intermediate_dim = positive_field(doc, "intermediate_dim");
  m.n_heads = positive_field(doc, "n_heads");
  m.vocab_size = positive_field(doc, "vocab_size");
  m.max_seq_len = positive_field(doc, "max_seq_len");
  m.activation = parse_activation(manifest_field<std::string>(doc, "activation"));
  m.norm_eps = static_cast<float>(manifest_field<double>(doc, "norm_eps"));
  m.validate();
  return m;
}

std::string manifest_to_json(const ModelManifest& m) {
  json doc = {
      {"n_layers", m.n_layers},
      {"hidden_dim", m.hidden_dim},
      {"intermediate_dim", m.intermediate_dim},
      {"n_heads", m.n_heads},
      {"vocab_size", m.vocab_size},
      {"activation", std::string(to_string(m.activation))},
      {"norm_eps", static_cast<double>(m.norm_eps)},
      {"max_seq_len", m.max_seq_len},
  };
  return doc.dump(2) + "\n";
}

ModelManifest read_manifest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

std::vector<TensorSpec> model_tensor_schema(const ModelManifest& m) {
  const std::uint64_t h = m.hidden_dim;
  const std::uint64_t d = m.intermediate_dim;
  std::vector<TensorSpec> specs;
  specs.push_back({"embed.tokens", {m.vocab_size, h}});
  specs.push_back({"embed.positions", {m.max_seq_len, h}});
  for (std::size_t i = 0; i < m.n_layers; ++i) {
    specs.push_back({layer_name(i, "attn_norm.weight"), {h}});
    specs.push_back({layer_name(i, "attn.w_q"), {h, h}});
    specs.push_back({layer_name(i, "attn.w_k"), {h, h}});
    specs.push_back({layer_name(i, "attn.w_v"), {h, h}});
    specs.push_back({layer_name(i, "attn.w_o"), {h, h}});
    specs.push_back({layer_name(i, "ffn_norm.weight"), {h}});
    specs.push_back({layer_name(i, "ffn.w_up"), {d, h}});
    specs.push_back({layer_name(i, "ffn.w_gate"), {d, h}});
    specs.push_back({layer_name(i, "ffn.w_down"), {h, d}});
  }
  specs.push_back({"final_norm.weight", {h}});
  specs.push_back({"lm_head", {m.vocab_size, h}});
  return specs;
}

std::vector<Tensor> generate_weights(const ModelManifest& m, std::uint64_t seed) {
  m.validate();
  const auto schema = model_tensor_schema(m);
  std::vector<Tensor> out;
  out.reserve(schema.size());
  for (std::size_t idx = 0; idx < schema.size(); ++idx) {
    const auto& spec = schema[idx];
    const auto stream = derive_seed(seed, idx);
    if (spec.name == "lm_head") {
      Tensor head = out.front();
      head.set_name(spec.name);
      out.push_back(std::move(head));
    } else if (spec.dims.size() == 1) {
      Tensor gain(spec.name, spec.dims);
      std::fill(gain.data().begin(), gain.data().end(), 1.0f);
      out.push_back(std::move(gain));
    } else if (spec.name == "embed.tokens") {
      out.push_back(seeded_tensor(stream, spec.dims, 1.0f, spec.name));
    } else if (spec.name == "embed.positions") {
      out.push_back(seeded_tensor(stream, spec.dims, 0.1f, spec.name));
    } else {
      const float scale = 1.0f / std::sqrt(static_cast<float>(spec.dims[1]));
      out.push_back(seeded_tensor(stream, spec.dims, scale, spec.name));
    }
  }
  return out;
}

TinyLm TinyLm::from_tensors(const ModelManifest& manifest, std::vector<Tensor> tensors) {
  manifest.validate();
  std::map<std::string, Tensor> by_name;
  for (auto& t : tensors) {
    auto name = t.name();
    if (!by_name.emplace(name, std::move(t)).second) throw SchemaError("duplicate tensor '" + name + "'");
  }
  const auto schema = model_tensor_schema(manifest);
  auto take = [&](const TensorSpec& spec) {
    auto it = by_name.find(spec.name);
    if (it == by_name.end()) throw SchemaError("missing tensor '" + spec.name + "'");
    if (it->second.dims() != spec.dims) {
      std::string want, got;
      for (auto d : spec.dims) want += (want.empty() ? "" : "x") + std::to_string(d);
      for (auto d : it->second.dims()) got += (got.empty() ? "" : "x") + std::to_string(d);
      throw SchemaError("tensor '" + spec.name + "' has shape " + got + ", expected " + want);
    }
    if (!it->second.all_finite()) throw SchemaError("tensor '" + spec.name + "' holds non-finite values");
    Tensor t = std::move(it->second);
    by_name.erase(it);
    return t;
  };

  TinyLm model;
  model.manifest_ = manifest;
  std::size_t k = 0;
  model.tok_emb_ = take(schema[k++]);
  model.pos_emb_ = take(schema[k++]);
  for (std::size_t i = 0; i < manifest.n_layers; ++i) {
    LayerWeights lw;
    lw.attn_norm = take(schema[k++]);
    lw.w_q = take(schema[k++]);
    lw.w_k = take(schema[k++]);
    lw.w_v = take(schema[k++]);
    lw.w_o = take(schema[k++]);
    lw.ffn_norm = take(schema[k++]);
    lw.ffn.w_up = take(schema[k++]);
    lw.ffn.w_gate = take(schema[k++]);
    lw.ffn.w_down = take(schema[k++]);
    lw.ffn.activation = manifest.activation;
    model.layers_.push_back(std::move(lw));
  }
  model.final_norm_ = take(schema[k++]);
  model.lm_head_ = take(schema[k++]);
  if (!by_name.empty()) throw SchemaError("unexpected tensor '" + by_name.begin()->first + "'");
  return model;
}

TinyLm TinyLm::load(const std::filesystem::path& manifest_path, const std::filesystem::path& container_path) {
  return from_tensors(read_manifest_file(manifest_path), read_container_file(container_path));
}

std::vector<Tensor> TinyLm::tensors() const {
  std::vector<Tensor> out{tok_emb_, pos_emb_};
  for (const auto& lw : layers_) {
    for (const Tensor* t : {&lw.attn_norm, &lw.w_q, &lw.w_k, &lw.w_v, &lw.w_o, &lw.ffn_norm,
                            &lw.ffn.w_up, &lw.ffn.w_gate, &lw.ffn.w_down}) {
      out.push_back(*t);
    }
  }
  out.push_back(final_norm_);
  out.push_back(lm_head_);
  return out;
}

Logits forward_logits(const TinyLm& model, std::span<const Token> tokens,
                      const std::optional<SparsifySpec>& sparsify, const ForwardHooks* hooks) {
  const auto& m = model.manifest();
  const std::size_t seq = tokens.size();
  const std::size_t h = m.hidden_dim;
  const std::size_t hd = m.head_dim();
  if (seq > m.max_seq_len) {
    throw InputError("sequence of " + std::to_string(seq) + " tokens exceeds max_seq_len " +
                     std::to_string(m.max_seq_len));
  }
  for (std::size_t t = 0; t < seq; ++t) {
    if (tokens[t] >= m.vocab_size) {
      throw InputError("token " + std::to_string(tokens[t]) + " at position " + std::to_string(t) +
                       " is outside the vocabulary");
    }
  }
  if (sparsify) sparsify->rule.validate();

  // Residual stream, one row per position.
  std::vector<float> x(seq * h);
  auto row = [&](std::vector<float>& buf, std::size_t t) { return std::span<float>(buf).subspan(t * h, h); };
  for (std::size_t t = 0; t < seq; ++t) {
    const auto te = model.token_embedding().data().subspan(tokens[t] * h, h);
    const auto pe = model.position_embedding().data().subspan(t * h, h);
    auto xt = row(x, t);
    for (std::size_t j = 0; j < h; ++j) xt[j] = te[j] + pe[j];
  }

  std::vector<float> normed(seq * h), q(seq * h), k(seq * h), v(seq * h), mixed(h), scores(seq);
  const float inv_sqrt_hd = 1.0f / std::sqrt(static_cast<float>(hd));

  for (std::size_t l = 0; l < m.n_layers; ++l) {
    const auto& lw = model.layer(l);
    for (std::size_t t = 0; t < seq; ++t) {
      rms_norm(row(x, t), lw.attn_norm.data(), m.norm_eps, row(normed, t));
      gemv_into(MatrixView(lw.w_q), row(normed, t), row(q, t));
      gemv_into(MatrixView(lw.w_k), row(normed, t), row(k, t));
      gemv_into(MatrixView(lw.w_v), row(normed, t), row(v, t));
    }
    for (std::size_t t = 0; t < seq; ++t) {
      for (std::size_t head = 0; head < m.n_heads; ++head) {
        const std::size_t off = head * hd;
        float peak = -INFINITY;
        for (std::size_t s = 0; s <= t; ++s) {
          float dot = 0.0f;
          for (std::size_t j = 0; j < hd; ++j) dot += q[t * h + off + j] * k[s * h + off + j];
          scores[s] = dot * inv_sqrt_hd;
          peak = std::max(peak, scores[s]);
        }
        float denom = 0.0f;
        for (std::size_t s = 0; s <= t; ++s) {
          scores[s] = std::exp(scores[s] - peak);
          denom += scores[s];
        }
        for (std::size_t j = 0; j < hd; ++j) {
          float acc = 0.0f;
          for (std::size_t s = 0; s <= t; ++s) acc += scores[s] * v[s * h + off + j];
          mixed[off + j] = acc / denom;
        }
      }
      const auto attn_out = gemv(MatrixView(lw.w_o), mixed);
      auto xt = row(x, t);
      for (std::size_t j = 0; j < h; ++j) xt[j] += attn_out[j];
    }
    for (std::size_t t = 0; t < seq; ++t) {
      auto xt = row(x, t);
      auto nt = row(normed, t);
      rms_norm(xt, lw.ffn_norm.data(), m.norm_eps, nt);
      if (hooks != nullptr && hooks->on_ffn_input) hooks->on_ffn_input(l, t, nt);
      std::vector<float> y;
      if (sparsify) {
        auto res = ffn_sparsified(nt, lw.ffn, sparsify->site, sparsify->rule);
        if (hooks != nullptr && hooks->on_mask) hooks->on_mask(l, t, res.trace);
        y = std::move(res.output);
      } else {
        y = ffn_dense(nt, lw.ffn);
      }
      for (std::size_t j = 0; j < h; ++j) xt[j] += y[j];
    }
  }

  Logits logits;
  logits.rows = seq;
  logits.cols = m.vocab_size;
  logits.values.resize(seq * m.vocab_size);
  std::vector<float> final_normed(h);
  for (std::size_t t = 0; t < seq; ++t) {
    rms_norm(row(x, t), model.final_norm().data(), m.norm_eps, final_normed);
    if (hooks != nullptr && hooks->on_final_hidden) hooks->on_final_hidden(t, final_normed);
    gemv_into(MatrixView(model.lm_head()), final_normed,
              std::span<float>(logits.values).subspan(t * m.vocab_size, m.vocab_size));
  }
  return logits;
}

std::vector<Tensor> fit_output_head(const TinyLm& model, std::span<const Token> tokens, double ridge) {
  if (tokens.size() < 2) throw InputError("fit_output_head: need at least 2 tokens");
  if (!(ridge > 0.0)) throw InputError("fit_output_head: ridge must be positive");
  const auto& m = model.manifest();
  const auto h = static_cast<Eigen::Index>(m.hidden_dim);
  const auto vocab = static_cast<Eigen::Index>(m.vocab_size);

  std::vector<float> hidden;
  std::vector<Token> targets;
  ForwardHooks hooks;
  for (const auto& [b, e] : eval_windows(tokens.size(), m.max_seq_len)) {
    const auto window = tokens.subspan(b, e - b);
    hooks.on_final_hidden = [&](std::size_t t, std::span<const float> v) {
      if (t + 1 < window.size()) {
        hidden.insert(hidden.end(), v.begin(), v.end());
        targets.push_back(window[t + 1]);
      }
    };
    forward_logits(model, window, std::nullopt, &hooks);
  }
  const auto n = static_cast<Eigen::Index>(targets.size());
  const Eigen::MatrixXd states =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(hidden.data(), n, h)
          .cast<double>();
  Eigen::MatrixXd gram = states.transpose() * states;
  gram.diagonal().array() += ridge * static_cast<double>(n);
  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(h, vocab);
  for (Eigen::Index r = 0; r < n; ++r) cross.col(targets[r]) += states.row(r).transpose();
  const Eigen::MatrixXd readout = gram.ldlt().solve(cross);  // [h x vocab]
  const Eigen::MatrixXd base = states * readout;             // [n x vocab]

  auto cross_entropy = [&](double scale) {
    double total = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      const double peak = scale * base.row(r).maxCoeff();
      const double lse = std::log((scale * base.row(r).array() - peak).exp().sum()) + peak;
      total += lse - scale * base(r, targets[r]);
    }
    return total / static_cast<double>(n);
  };
  double best_scale = 1.0;
  double best_ce = cross_entropy(1.0);
  for (int step = 1; step <= 40; ++step) {
    const double scale = std::pow(2.0, step / 4.0);
    const double ce = cross_entropy(scale);
    if (ce < best_ce) {
      best_ce = ce;
      best_scale = scale;
    }
  }

  auto tensors = model.tensors();
  auto& head = tensors.back();
  for (Eigen::Index v = 0; v < vocab; ++v) {
    for (Eigen::Index j = 0; j < h; ++j) {
      head.data()[static_cast<std::size_t>(v * h + j)] = static_cast<float>(best_scale * readout(j, v));
    }
  }
  return tensors;
}

std::vector<std::pair<std::size_t, std::size_t>> eval_windows(std::size_t n_tokens, std::size_t max_seq_len) {
  if (max_seq_len < 2) throw InputError("eval_windows: max_seq_len must be at least 2");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (n_tokens < 2) return out;
  for (std::size_t begin = 0; begin + 1 < n_tokens; begin += max_seq_len - 1) {
    out.emplace_back(begin, std::min(n_tokens, begin + max_seq_len));
  }
  return out;
}

EvalReport eval_metrics(const TinyLm& model, std::span<const Token> tokens,
                        const std::optional<SparsifySpec>& sparsify, const EvalOptions& options) {
  if (tokens.size() < 2) throw InputError("eval_metrics: need at least 2 tokens");
  const auto windows = eval_windows(tokens.size(), model.manifest().max_seq_len);
  std::vector<WindowStats> stats(windows.size());

  auto run = [&](std::size_t w) {
    const auto [b, e] = windows[w];
    stats[w] = eval_window(model, tokens.subspan(b, e - b), sparsify);
  };
  const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(windows.size())));
  if (threads == 1) {
    for (std::size_t w = 0; w < windows.size(); ++w) run(w);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(threads);
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back([&, i] {
        try {
          for (std::size_t w; (w = next.fetch_add(1)) < windows.size();) run(w);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& err : errors) {
      if (err) std::rethrow_exception(err);
    }
  }

  const auto layers = model.manifest().n_layers;
  EvalReport report;
  double ce_sum = 0.0;
  std::uint64_t correct = 0;
  std::vector<std::uint64_t> dropped(layers, 0), entries(layers, 0);
  for (const auto& st : stats) {
    ce_sum += st.ce_sum;
    correct += st.correct;
    report.tokens_evaluated += st.predictions;
    report.mask_evaluations += st.masks;
    for (std::size_t l = 0; l < layers; ++l) {
      dropped[l] += st.dropped[l];
      entries[l] += st.entries[l];
    }
  }
  const auto n = static_cast<double>(report.tokens_evaluated);
  report.cross_entropy = ce_sum / n;
  report.top1_accuracy = static_cast<double>(correct) / n;
  report.per_layer_sparsity.assign(layers, 0.0);
  std::uint64_t all_dropped = 0, all_entries = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    if (entries[l] > 0) report.per_layer_sparsity[l] = static_cast<double>(dropped[l]) / static_cast<double>(entries[l]);
    all_dropped += dropped[l];
    all_entries += entries[l];
  }
  report.avg_induced_sparsity = all_entries > 0 ? static_cast<double>(all_dropped) / static_cast<double>(all_entries) : 0.0;
  return report;
}

}  // namespace sparseglu
