#include "seqscore/synthdist.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>

#include "seqscore/errors.hpp"
#include "seqscore/kahan.hpp"
#include "seqscore/rng.hpp"

namespace seqscore {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Partial {
  KahanSum entropy;
  KahanSum mass;
  double max_log_prob = kNegInf;
  std::vector<TokenId> argmax;
  std::uint64_t leaves = 0;
};

void visit(const TokenDistributionSource& source, std::vector<TokenId>& prefix, double prefix_lp,
           std::size_t depth, Partial& acc) {
  const TokenDistribution node = source.next(prefix);
  const auto lps = node.log_probs();
  const bool last = prefix.size() + 1 == depth;
  for (std::size_t j = 0; j < lps.size(); ++j) {
    const double lp = prefix_lp + lps[j];
    if (lp == kNegInf) {
      // Zero-mass subtree: no entropy, no mass, cannot hold the maximum.
      acc.leaves += leaf_count(lps.size(), depth - prefix.size() - 1);
      continue;
    }
    prefix.push_back(static_cast<TokenId>(j));
    if (last) {
      const double p = std::exp(lp);
      acc.mass.add(p);
      acc.entropy.add(-p * lp);
      ++acc.leaves;
      if (lp > acc.max_log_prob) {
        acc.max_log_prob = lp;
        acc.argmax = prefix;
      }
    } else {
      visit(source, prefix, lp, depth, acc);
    }
    prefix.pop_back();
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

DirichletSpec DirichletSpec::preset(std::size_t vocab_size) {
  DirichletSpec spec;
  if (vocab_size == 20) {
    spec.alphas.assign(20, 0.2);
    spec.alphas[0] = spec.alphas[1] = 10.0;
  } else if (vocab_size == 100) {
    spec.alphas.assign(100, 0.2);
    spec.alphas[0] = spec.alphas[1] = 10.0;
    std::fill(spec.alphas.begin() + 2, spec.alphas.begin() + 6, 1.0);
  } else {
    throw InputError("no Dirichlet preset for vocabulary size " + std::to_string(vocab_size) +
                     " (presets exist for 20 and 100)");
  }
  spec.shuffle = true;
  return spec;
}

bool DirichletSpec::has_preset(std::size_t vocab_size) noexcept {
  return vocab_size == 20 || vocab_size == 100;
}

void DirichletSpec::validate() const {
  if (alphas.size() < 2) throw InputError("Dirichlet spec needs at least 2 alphas");
  for (double a : alphas) {
    if (!std::isfinite(a) || a <= 0.0) throw InputError("Dirichlet alphas must be finite and > 0");
  }
}

std::uint64_t node_key(std::uint64_t seed, std::span<const TokenId> prefix) noexcept {
  std::uint64_t h = mix64(seed + kGoldenGamma);
  for (TokenId t : prefix) h = mix64(h + (static_cast<std::uint64_t>(t) + 1) * kGoldenGamma);
  return h;
}

SyntheticModel::SyntheticModel(DirichletSpec spec, std::size_t depth, std::uint64_t seed)
    : spec_(std::move(spec)), depth_(depth), seed_(seed) {
  spec_.validate();
  if (depth_ < 1) throw InputError("synthetic model depth must be >= 1");
}

void SyntheticModel::node_log_probs(std::span<const TokenId> prefix, std::vector<double>& out) const {
  if (prefix.size() >= depth_) {
    throw InputError("prefix length " + std::to_string(prefix.size()) + " has no next token at depth " +
                     std::to_string(depth_));
  }
  const std::size_t n = spec_.vocab_size();
  SplitMix64 rng(node_key(seed_, prefix));
  out.assign(spec_.alphas.begin(), spec_.alphas.end());
  if (spec_.shuffle) {
    for (std::size_t i = n - 1; i > 0; --i) std::swap(out[i], out[rng.below(i + 1)]);
  }
  // Dirichlet draw: normalized Gamma(alpha_i, 1) variates, kept in log space.
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.log_gamma(out[i]);
  const double norm = log_sum_exp(out);
  for (double& v : out) v -= norm;
}

TokenDistribution SyntheticModel::next(std::span<const TokenId> prefix) const {
  std::vector<double> lp;
  node_log_probs(prefix, lp);
  return TokenDistribution::assume_normalized(std::move(lp));
}

SyntheticModel sample_model(const DirichletSpec& spec, std::size_t depth, std::uint64_t seed) {
  return SyntheticModel(spec, depth, seed);
}

std::uint64_t leaf_count(std::size_t vocab_size, std::size_t depth) noexcept {
  std::uint64_t n = 1;
  for (std::size_t t = 0; t < depth; ++t) {
    if (n > std::numeric_limits<std::uint64_t>::max() / vocab_size) {
      return std::numeric_limits<std::uint64_t>::max();
    }
    n *= vocab_size;
  }
  return n;
}

void check_budget(std::size_t vocab_size, std::size_t depth, const EnumerationBudget& budget) {
  const std::uint64_t leaves = leaf_count(vocab_size, depth);
  if (leaves > budget.max_leaves) {
    throw ResourceError("exhaustive enumeration needs " + std::to_string(leaves) +
                        " leaves, budget is " + std::to_string(budget.max_leaves));
  }
}

ExactStats exact_stats(const TokenDistributionSource& source, const EnumerationBudget& budget) {
  const std::size_t width = source.vocab().size();
  const std::size_t depth = source.max_len();
  check_budget(width, depth, budget);

  std::vector<Partial> parts;
  if (depth == 1) {
    parts.resize(1);
    std::vector<TokenId> prefix;
    visit(source, prefix, 0.0, depth, parts[0]);
  } else {
    const TokenDistribution root = source.next({});
    const auto root_lp = root.log_probs();
    parts.resize(width);
    std::vector<std::exception_ptr> errors(width);
    const auto n = static_cast<std::int64_t>(width);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t i = 0; i < n; ++i) {
      auto& part = parts[static_cast<std::size_t>(i)];
      if (root_lp[i] == kNegInf) {
        part.leaves = leaf_count(width, depth - 1);
        continue;
      }
      try {
        std::vector<TokenId> prefix{static_cast<TokenId>(i)};
        prefix.reserve(depth);
        visit(source, prefix, root_lp[i], depth, part);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  ExactStats out;
  out.max_log_prob = kNegInf;
  KahanSum entropy, mass;
  for (auto& part : parts) {
    entropy.add(part.entropy.value());
    mass.add(part.mass.value());
    out.leaves += part.leaves;
    if (part.max_log_prob > out.max_log_prob) {
      out.max_log_prob = part.max_log_prob;
      out.argmax_tokens = std::move(part.argmax);
    }
  }
  out.entropy_nats = entropy.value();
  out.total_mass = mass.value();
  return out;
}

SynthModelConfig parse_model_config(const std::string& text) {
  SynthModelConfig cfg;
  std::size_t vocab_size = 0;
  bool use_preset = false;
  bool have_depth = false;
  bool have_shuffle = false;
  bool shuffle = true;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "", "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "vocab_size") {
        vocab_size = std::stoul(value);
      } else if (key == "preset") {
        if (value != "zipf") throw ParseError(lineno, key, "unknown preset '" + value + "'");
        use_preset = true;
      } else if (key == "alphas") {
        cfg.spec.alphas.clear();
        std::istringstream items(value);
        std::string item;
        while (std::getline(items, item, ',')) cfg.spec.alphas.push_back(std::stod(trim(item)));
      } else if (key == "depth") {
        cfg.depth = std::stoul(value);
        have_depth = true;
      } else if (key == "seed") {
        cfg.seed = std::stoull(value);
      } else if (key == "shuffle") {
        if (value != "true" && value != "false") throw ParseError(lineno, key, "expected true|false");
        shuffle = value == "true";
        have_shuffle = true;
      } else {
        throw ParseError(lineno, key, "unknown key");
      }
    } catch (const std::logic_error&) {
      throw ParseError(lineno, key, "invalid value '" + value + "'");
    }
  }
  if (use_preset && !cfg.spec.alphas.empty()) {
    throw ParseError(lineno, "preset", "give either preset or alphas, not both");
  }
  if (use_preset) {
    if (vocab_size == 0) throw ParseError(lineno, "vocab_size", "preset requires vocab_size");
    cfg.spec = DirichletSpec::preset(vocab_size);
  } else if (cfg.spec.alphas.empty()) {
    throw ParseError(lineno, "alphas", "missing alphas or preset");
  } else if (vocab_size != 0 && vocab_size != cfg.spec.alphas.size()) {
    throw ParseError(lineno, "vocab_size", "does not match number of alphas");
  }
  if (!have_depth) throw ParseError(lineno, "depth", "missing depth");
  if (have_shuffle) cfg.spec.shuffle = shuffle;
  cfg.spec.validate();
  if (cfg.depth < 1) throw InputError("depth must be >= 1");
  return cfg;
}

std::string format_model_config(const SynthModelConfig& config) {
  std::ostringstream os;
  const std::size_t width = config.spec.vocab_size();
  os << "vocab_size = " << width << '\n';
  DirichletSpec preset_spec;
  if (DirichletSpec::has_preset(width)) preset_spec = DirichletSpec::preset(width);
  if (!preset_spec.alphas.empty() && preset_spec.alphas == config.spec.alphas) {
    os << "preset = zipf\n";
  } else {
    os << "alphas = ";
    for (std::size_t i = 0; i < width; ++i) os << (i ? ", " : "") << format_real(config.spec.alphas[i]);
    os << '\n';
  }
  os << "depth = " << config.depth << '\n';
  os << "seed = " << config.seed << '\n';
  os << "shuffle = " << (config.spec.shuffle ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace seqscore
