#include "advclaim/ganrl/gan.hpp"

#include <cmath>
#include <numeric>

#include "advclaim/numkit/ops.hpp"

namespace advclaim {

namespace {

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

nlohmann::json GeneratorNet::to_json() const {
  return {{"network", net.to_json()}, {"learning_rate", adam.learning_rate}};
}

GeneratorNet GeneratorNet::from_json(const nlohmann::json& j) {
  GeneratorNet g;
  g.net = Mlp::from_json(j.at("network"));
  g.adam = AdamState(g.net.params().size(), j.at("learning_rate").get<double>());
  return g;
}

std::vector<double> DiscriminatorNet::logits(ConstMatrixView x) const {
  const Matrix out = net.forward(x);
  return {out.values().begin(), out.values().end()};
}

std::vector<double> DiscriminatorNet::probability(ConstMatrixView x) const {
  auto l = logits(x);
  for (double& v : l) v = sigmoid(v);
  return l;
}

GeneratorNet make_generator(std::size_t latent_dim, std::size_t out_dim, std::uint64_t seed, double lr) {
  GeneratorNet g;
  g.net = Mlp({latent_dim, 128, 256, 512, 64, out_dim}, Activation::leaky_relu(0.01), Activation::sigmoid());
  Rng rng = Rng::derive(seed, 41);
  g.net.initialize(rng);
  g.adam = AdamState(g.net.params().size(), lr);
  return g;
}

DiscriminatorNet make_discriminator(std::size_t in_dim, std::uint64_t seed, double lr) {
  DiscriminatorNet d;
  d.net = Mlp({in_dim, 64, 512, 256, 128, 1}, Activation::leaky_relu(0.01), Activation::identity());
  Rng rng = Rng::derive(seed, 42);
  d.net.initialize(rng);
  d.adam = AdamState(d.net.params().size(), lr);
  return d;
}

Matrix generate_batch(const GeneratorNet& gen, Rng& rng, std::size_t n) {
  if (n == 0) return Matrix(0, gen.out_dim());
  const Matrix z = sample_normal(rng, n, gen.latent_dim());
  return gen.forward(z);
}

GanHistory pretrain_gan(GeneratorNet& gen, DiscriminatorNet& disc, const Matrix& data, const GanConfig& cfg) {
  if (data.cols() != gen.out_dim() || data.cols() != disc.in_dim()) {
    throw ShapeError("gan: data width " + std::to_string(data.cols()) + " does not match the networks");
  }
  if (data.rows() == 0) throw ConfigError("gan: no training rows");
  if (cfg.batch_size == 0) throw ConfigError("gan: batch_size must be >= 1");
  for (double v : data.values()) {
    if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("gan: training data must be normalized to [0, 1]");
  }

  gen.adam.learning_rate = cfg.gen_lr;
  gen.adam.beta1 = cfg.beta1;
  disc.adam.learning_rate = cfg.disc_lr;
  disc.adam.beta1 = cfg.beta1;

  Rng order_rng = Rng::derive(cfg.seed, 43);
  Rng z_rng = Rng::derive(cfg.seed, 44);
  std::vector<std::size_t> order(data.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});

  GanHistory hist;
  std::size_t low_streak = 0;
  std::vector<double> g_disc, g_gen;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(std::span<std::size_t>(order));
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, order.size() - start);
      const double inv_n = 1.0 / static_cast<double>(n);
      const Matrix real = data.select_rows(std::span<const std::size_t>(order).subspan(start, n));

      // Discriminator: minimize softplus(-l_real) + softplus(l_fake).
      const Matrix fake = generate_batch(gen, z_rng, n);
      Mlp::Tape t_real, t_fake;
      const Matrix l_real = disc.net.forward(real, t_real);
      const Matrix l_fake = disc.net.forward(fake, t_fake);
      double d_loss = 0.0;
      Matrix d_real(n, 1), d_fake(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        d_loss += inv_n * (softplus(-l_real(i, 0)) + softplus(l_fake(i, 0)));
        d_real(i, 0) = inv_n * (sigmoid(l_real(i, 0)) - 1.0);
        d_fake(i, 0) = inv_n * sigmoid(l_fake(i, 0));
      }
      g_disc.assign(disc.net.params().size(), 0.0);
      disc.net.backward(t_real, d_real, g_disc);
      disc.net.backward(t_fake, d_fake, g_disc);
      adam_step(disc.net.params(), g_disc, disc.adam);

      // Generator: backprop the chosen objective through the updated discriminator.
      const Matrix z = sample_normal(z_rng, n, gen.latent_dim());
      Mlp::Tape t_gen, t_d;
      const Matrix x_gen = gen.net.forward(z, t_gen);
      const Matrix l_gen = disc.net.forward(x_gen, t_d);
      double g_loss = 0.0;
      Matrix d_l(n, 1);
      for (std::size_t i = 0; i < n; ++i) {
        const double l = l_gen(i, 0);
        if (cfg.non_saturating) {
          g_loss += inv_n * softplus(-l);
          d_l(i, 0) = inv_n * (sigmoid(l) - 1.0);
        } else {
          g_loss -= inv_n * softplus(l);  // mean log(1 - D)
          d_l(i, 0) = -inv_n * sigmoid(l);
        }
      }
      std::vector<double> scratch;
      const Matrix d_x = disc.net.backward(t_d, d_l, scratch);
      g_gen.assign(gen.net.params().size(), 0.0);
      gen.net.backward(t_gen, d_x, g_gen);
      adam_step(gen.net.params(), g_gen, gen.adam);

      hist.disc_loss.push_back(d_loss);
      hist.gen_loss.push_back(g_loss);
      low_streak = d_loss < cfg.divergence_threshold ? low_streak + 1 : 0;
      if (cfg.divergence_patience > 0 && low_streak >= cfg.divergence_patience) {
        throw DivergenceError("gan: discriminator loss below " + std::to_string(cfg.divergence_threshold) + " for " +
                                  std::to_string(low_streak) + " consecutive steps (epoch " + std::to_string(epoch) +
                                  ", last generator loss " + std::to_string(g_loss) + ")",
                              std::move(hist));
      }
    }
  }
  return hist;
}

}  // namespace advclaim
