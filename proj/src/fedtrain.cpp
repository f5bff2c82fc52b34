#include "fedsel/fedtrain.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fedsel/error.hpp"
#include "fedsel/simd.hpp"

namespace fedsel {

void Dataset::push_back(std::span<const double> x, int y) {
  if (x.size() != dim) throw ConfigError("dataset: feature dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
}

std::vector<double> Partition::data_sizes() const {
  std::vector<double> out;
  out.reserve(train.size());
  for (const Dataset& d : train) out.push_back(static_cast<double>(d.size()));
  return out;
}

namespace {

// Draws x | y from the mixture into `buf`.
void draw_features(int label, const PartitionConfig& cfg, std::span<double> buf, Rng& rng) {
  std::normal_distribution<double> noise(0.0, cfg.noise_std);
  const double mean = (cfg.offset + label * cfg.separation) / std::sqrt(static_cast<double>(buf.size()));
  for (double& v : buf) v = mean + noise(rng);
}

int draw_label(double p_positive, Rng& rng) {
  if (p_positive >= 1.0) return 1;
  if (p_positive <= 0.0) return -1;
  return std::bernoulli_distribution(p_positive)(rng) ? 1 : -1;
}

Dataset draw_dataset(std::size_t count, std::size_t dim, double p_positive, const PartitionConfig& cfg, Rng& rng) {
  Dataset d;
  d.dim = dim;
  d.features.reserve(count * dim);
  d.labels.reserve(count);
  std::vector<double> buf(dim);
  for (std::size_t i = 0; i < count; ++i) {
    const int y = draw_label(p_positive, rng);
    draw_features(y, cfg, buf, rng);
    d.push_back(buf, y);
  }
  return d;
}

}  // namespace

Partition generate_partition(const PartitionConfig& cfg, Rng& rng) {
  if (cfg.dim < 1) throw ConfigError("partition: dim must be >= 1");
  if (cfg.clients < 1) throw ConfigError("partition: need at least one client");
  if (cfg.sizes.size() != cfg.clients) throw ConfigError("partition: sizes must list one entry per client");
  if (cfg.iid.size() != cfg.clients) throw ConfigError("partition: iid flags must list one entry per client");
  if (cfg.labels_per_noniid_client < 1 || cfg.labels_per_noniid_client > 2)
    throw ConfigError("partition: labels_per_noniid_client must be 1 or 2 for a two-class task");
  if (!(cfg.noniid_major_fraction >= 0.5 && cfg.noniid_major_fraction <= 1.0))
    throw ConfigError("partition: noniid_major_fraction must lie in [0.5, 1]");
  if (!(cfg.noniid_positive_share >= 0.0 && cfg.noniid_positive_share <= 1.0))
    throw ConfigError("partition: noniid_positive_share must lie in [0,1]");
  if (!(cfg.noise_std > 0.0)) throw ConfigError("partition: noise_std must be positive");
  for (std::size_t s : cfg.sizes)
    if (s < 1) throw ConfigError("partition: every client needs at least one training sample");

  Partition p;
  p.dim = cfg.dim;
  p.train.reserve(cfg.clients);
  p.test.reserve(cfg.clients);
  std::size_t noniid_rank = 0;
  for (std::size_t n = 0; n < cfg.clients; ++n) {
    double p_pos = 0.5;
    if (!cfg.iid[n]) {
      const double r = static_cast<double>(noniid_rank++);
      const double share = cfg.noniid_positive_share;
      const bool major_positive = std::floor((r + 1.0) * share + 0.5) > std::floor(r * share + 0.5);
      const double major = cfg.labels_per_noniid_client == 1 ? 1.0 : cfg.noniid_major_fraction;
      p_pos = major_positive ? major : 1.0 - major;
    }
    p.train.push_back(draw_dataset(cfg.sizes[n], cfg.dim, p_pos, cfg, rng));
    const double test_p = cfg.local_test == LocalTestDistribution::global ? 0.5 : p_pos;
    p.test.push_back(draw_dataset(cfg.test_per_client, cfg.dim, test_p, cfg, rng));
  }
  p.global_test = draw_dataset(cfg.global_test_size, cfg.dim, 0.5, cfg, rng);
  return p;
}

double GlobalModel::score(std::span<const double> x) const { return simd::dot(weights, x) + bias; }

bool GlobalModel::finite() const noexcept {
  return std::isfinite(bias) && std::all_of(weights.begin(), weights.end(), [](double w) { return std::isfinite(w); });
}

GlobalModel local_sgd(const GlobalModel& model, const Dataset& data, const TrainingParams& params, Rng& rng) {
  if (params.batch < 1) throw ConfigError("local_sgd: batch must be >= 1");
  if (!(params.step > 0.0)) throw ConfigError("local_sgd: step must be positive");
  if (params.reg < 0.0) throw ConfigError("local_sgd: reg must be non-negative");
  if (data.empty()) throw TrainingError("local_sgd: empty training set");
  if (data.dim != model.weights.size()) throw TrainingError("local_sgd: model and data dimensions differ");

  GlobalModel w = model;
  if (params.epochs == 0) return w;

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> grad(data.dim);

  for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < n; start += params.batch) {
      const std::size_t stop = std::min(n, start + params.batch);
      std::fill(grad.begin(), grad.end(), 0.0);
      double grad_bias = 0.0;
      for (std::size_t k = start; k < stop; ++k) {
        const auto x = data.row(order[k]);
        const double y = data.labels[order[k]];
        if (y * w.score(x) < 1.0) {
          // accumulate the negated hinge subgradient  y * x
          simd::axpy(y, x, grad);
          grad_bias += y;
        }
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      if (params.reg != 0.0) simd::scale(1.0 - params.step * params.reg, w.weights);
      simd::axpy(params.step * inv, grad, w.weights);
      w.bias += params.step * inv * grad_bias;
    }
  }
  if (!w.finite()) throw NumericError("local_sgd: non-finite parameters");
  return w;
}

GlobalModel aggregate(std::span<const GlobalModel> local_models, std::span<const std::uint8_t> uplink_ok,
                      std::span<const double> data_sizes, const GlobalModel& previous) {
  if (local_models.size() != uplink_ok.size() || local_models.size() != data_sizes.size())
    throw ConfigError("aggregate: models, uplink flags and sizes must be aligned");
  double total = 0.0;
  for (std::size_t k = 0; k < data_sizes.size(); ++k) {
    if (data_sizes[k] < 0.0) throw ConfigError("aggregate: negative data size");
    if (uplink_ok[k]) total += data_sizes[k];
  }
  GlobalModel out = previous;
  out.round = previous.round + 1;
  if (!(total > 0.0)) return out;

  std::fill(out.weights.begin(), out.weights.end(), 0.0);
  out.bias = 0.0;
  for (std::size_t k = 0; k < local_models.size(); ++k) {
    if (!uplink_ok[k] || data_sizes[k] == 0.0) continue;
    const GlobalModel& m = local_models[k];
    if (m.weights.size() != out.weights.size()) throw ConfigError("aggregate: model dimension mismatch");
    const double share = data_sizes[k] / total;
    simd::axpy(share, m.weights, out.weights);
    out.bias += share * m.bias;
  }
  return out;
}

double evaluate(const GlobalModel& model, const Dataset& test) {
  if (test.empty()) throw EvaluationError("evaluate: empty test set");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) correct += model.predict(test.row(i)) == test.labels[i] ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double average_opinion(std::span<const double> opinions) {
  if (opinions.empty()) throw DomainError("average_opinion: empty opinion vector");
  double sum = 0.0;
  for (double r : opinions) sum += r;
  return sum / static_cast<double>(opinions.size());
}

BlockResult run_fl_round_block(const GlobalModel& start, std::span<const ClientId> selected,
                               const ChannelModel& channel, const Partition& partition,
                               const TrainingParams& params, std::size_t rounds, std::uint64_t block_seed) {
  if (rounds < 1) throw ConfigError("run_fl_round_block: L must be >= 1");
  BlockResult result{start, 0, 0};
  const std::size_t k = selected.size();
  std::vector<GlobalModel> locals(k);
  std::vector<std::uint8_t> ok(k);
  std::vector<double> sizes(k);
  for (std::size_t j = 0; j < k; ++j) sizes[j] = static_cast<double>(partition.train.at(selected[j]).size());

  for (std::size_t l = 0; l < rounds; ++l) {
    std::size_t successes = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const ClientId c = selected[j];
      Rng uplink_rng = make_rng(block_seed, l * partition.clients() + c, "uplink");
      ok[j] = sample_uplink(channel.success_probability(c), uplink_rng) ? 1 : 0;
      if (ok[j]) {
        Rng train_rng = make_rng(block_seed, l * partition.clients() + c, "sgd");
        locals[j] = local_sgd(result.model, partition.train[c], params, train_rng);
        ++successes;
      } else {
        locals[j] = result.model;
      }
    }
    result.successful_uploads += successes;
    if (successes == 0) ++result.empty_rounds;
    result.model = aggregate(locals, ok, sizes, result.model);
  }
  return result;
}

}  // namespace fedsel
