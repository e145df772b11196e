#include <doctest.h>

#include <array>
#include <cmath>
#include <fstream>
#include <random>

#include "linkpoison/errors.hpp"
#include "linkpoison/graph/generators.hpp"
#include "linkpoison/surrogate/vgae.hpp"
#include "linkpoison/tensor/optim.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"
#include "support/vgae_oracle.hpp"

using namespace linkpoison;
using namespace linkpoison::surrogate;

namespace {

Matrix random_adjacency(std::size_t n, double p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (u(rng) < p) a(i, j) = a(j, i) = 1.0;
  if (a(0, 1) == 0.0) a(0, 1) = a(1, 0) = 1.0;  // keep at least one edge
  return a;
}

double tape_scalar(const std::function<Var(Tape&)>& build) {
  Tape t;
  return build(t).value().item();
}

}  // namespace

TEST_CASE("normalize-adjacency examples") {
  CHECK(normalize_adjacency(Matrix{{0}}) == Matrix{{1}});
  CHECK(tensor::max_abs_diff(normalize_adjacency(Matrix{{0, 1}, {1, 0}}),
                             Matrix{{0.5, 0.5}, {0.5, 0.5}}) < 1e-15);
  Tape t;
  Var a = t.leaf(Matrix{{0, 1, 0}, {1, 0, 0}, {0, 0, 0}});
  Matrix an = normalize_adjacency(a).value();
  CHECK(an(2, 2) == doctest::Approx(1.0));
  CHECK(an(2, 0) == 0.0);
  CHECK(oracle::max_rel_err(an, normalize_adjacency(a.value())) < 1e-15);
}

TEST_CASE("normalize-adjacency gradient matches finite differences") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    Matrix a0 = random_adjacency(5, 0.4, rng);
    Tape t;
    Var a = t.leaf(a0);
    auto grads = t.backward(tensor::sum(normalize_adjacency(a)));
    auto fd = oracle::finite_difference(
        [](const Matrix& m) { return tensor::sum(oracle::naive_normalize(m)).item(); }, a0);
    CHECK(oracle::max_rel_err(grads[a], fd) <= 1e-4);
  }
}

TEST_CASE("encode contracts") {
  std::mt19937_64 rng(2);
  const std::size_t n = 7;
  Matrix a0 = random_adjacency(n, 0.4, rng);
  Tape t;
  Var an = t.constant(normalize_adjacency(a0));
  Var x = t.constant(Matrix::identity(n));
  VgaeParams p = init_params(n, {}, 3);
  ParamVars pv = to_leaves(t, p);

  auto zero_noise = std::make_shared<Matrix>(n, 16);
  Encoding e0 = encode(an, x, pv, zero_noise);
  CHECK(e0.z.value() == e0.mu.value());
  CHECK(e0.z.rows() == n);
  CHECK(e0.z.cols() == 16);

  VgaeParams zero{Matrix(n, 32), Matrix(32, 16), Matrix(32, 16)};
  auto noise = epoch_noise(9, 0, n, 16);
  Encoding ez = encode(an, x, to_leaves(t, zero), noise);
  CHECK(ez.mu.value() == Matrix(n, 16));
  CHECK(ez.z.value() == *noise);

  CHECK_THROWS_AS(encode(an, x, pv, std::make_shared<Matrix>(n, 3)), ShapeError);
}

TEST_CASE("decode contracts") {
  Tape t;
  Var z0 = t.leaf(Matrix(4, 3));
  CHECK(decode(z0).value() == Matrix(4, 4, 0.5));

  std::mt19937_64 rng(4);
  Matrix z = oracle::random_matrix(6, 3, rng);
  for (std::size_t c = 0; c < 3; ++c) z(1, c) = z(0, c);
  Matrix ah = decode(t.leaf(z)).value();
  CHECK(ah == tensor::transpose(ah));
  // Row 0: the entry against its own copy is the largest among equal-norm rows.
  for (std::size_t j = 0; j < 6; ++j) {
    double nj = 0.0, n0 = 0.0;
    for (std::size_t c = 0; c < 3; ++c) {
      nj += z(j, c) * z(j, c);
      n0 += z(0, c) * z(0, c);
    }
    if (std::abs(nj - n0) < 1e-12) CHECK(ah(0, 1) >= ah(0, j) - 1e-15);
  }
}

TEST_CASE("kl-divergence") {
  Tape t;
  CHECK(kl_divergence(t.leaf(Matrix(3, 2)), t.leaf(Matrix(3, 2))).value().item() == 0.0);
  CHECK(kl_divergence(t.leaf(Matrix{{1}}), t.leaf(Matrix{{0}})).value().item() ==
        doctest::Approx(0.5));
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Var mu = t.leaf(oracle::random_matrix(4, 3, rng, -2, 2));
    Var lv = t.leaf(oracle::random_matrix(4, 3, rng, -2, 2));
    CHECK(kl_divergence(mu, lv).value().item() >= 0.0);
  }
}

TEST_CASE("weighted-bce examples") {
  Matrix a{{0, 1}, {1, 0}};
  CHECK(positive_class_weight(a) == 1.0);
  CHECK_THROWS_AS(positive_class_weight(Matrix(2, 2)), DomainError);

  CHECK(tape_scalar([&](Tape& t) {
          return weighted_bce(t.leaf(Matrix(2, 2, 0.5)), t.constant(a), 1.0);
        }) == doctest::Approx(4.0 * std::log(2.0)));
  CHECK(tape_scalar([&](Tape& t) { return weighted_bce(t.leaf(a), t.constant(a), 1.0); }) <
        1e-5);

  Tape t;
  auto empty = std::make_shared<tensor::IndexList>();
  CHECK_THROWS_AS(weighted_bce(t.leaf(a), t.constant(a), 1.0, empty), DomainError);
  auto one = std::make_shared<tensor::IndexList>(tensor::IndexList{1});
  CHECK(weighted_bce(t.leaf(Matrix(2, 2, 0.5)), t.constant(a), 3.0, one).value().item() ==
        doctest::Approx(3.0 * std::log(2.0)));
}

TEST_CASE("forward matches an independent loop implementation") {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 3 + trial % 4;
    Matrix a0 = random_adjacency(n, 0.5, rng);
    Matrix x0 = oracle::random_matrix(n, 3, rng);
    VgaeParams p = init_params(3, {4, 2}, trial);
    auto noise = epoch_noise(trial, 0, n, 2);
    const double w = positive_class_weight(a0);
    Tape t;
    Forward f = forward(t.leaf(a0), t.constant(x0), to_leaves(t, p), noise, w);
    auto ref = oracle::naive_vgae_loss(a0, x0, p.w0, p.w_mu, p.w_logvar, *noise, w);
    CHECK(f.bce.value().item() == doctest::Approx(ref.bce).epsilon(1e-12));
    CHECK(f.kl.value().item() == doctest::Approx(ref.kl).epsilon(1e-12));
    CHECK(f.loss.value().item() == f.bce.value().item() + f.kl.value().item());
    CHECK(f.a_hat.value() == tensor::transpose(f.a_hat.value()));
  }
}

TEST_CASE("end-to-end adjacency gradient matches finite differences") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t n = 2 + trial % 5;
    Matrix a0 = random_adjacency(n, 0.5, rng);
    Matrix x0 = oracle::random_matrix(n, n, rng);
    VgaeParams p = init_params(n, {8, 4}, 100 + trial);
    auto noise = epoch_noise(trial, 1, n, 4);
    const double w = positive_class_weight(a0);
    Tape t;
    Var a = t.leaf(a0);
    Forward f = forward(a, t.constant(x0), to_leaves(t, p, false), noise, w);
    auto grads = t.backward(f.loss, std::array{a});
    auto fd = oracle::finite_difference(
        [&](const Matrix& m) {
          return oracle::naive_vgae_loss(m, x0, p.w0, p.w_mu, p.w_logvar, *noise, w).total();
        },
        a0);
    CAPTURE(trial);
    CHECK(oracle::max_rel_err(grads[a], fd) <= 1e-4);
  }
}

TEST_CASE("trainer: ELBO decomposition, determinism, zero learning rate") {
  auto g = graph::planted_partition(20, 2, 0.5, 0.05, 3);
  VgaeTrainer a(g, {}, 5);
  VgaeTrainer b(g, {}, 5);
  for (int e = 0; e < 10; ++e) {
    auto sa = a.step();
    auto sb = b.step();
    CHECK(sa.loss == sa.bce + sa.kl);
    CHECK(sa.loss == sb.loss);
  }
  CHECK(a.params() == b.params());

  TrainOptions frozen;
  frozen.lr = 0.0;
  frozen.optimizer = tensor::OptimizerKind::kGradientDescent;
  VgaeTrainer c(g, frozen, 5);
  const VgaeParams before = c.params();
  for (int e = 0; e < 3; ++e) c.step();
  CHECK(c.params() == before);
}

TEST_CASE("trainer: loss decreases over 50 epochs") {
  auto g = graph::planted_partition(20, 2, 0.5, 0.05, 3);
  // Plain descent on the summed loss needs a smaller step than Adam here.
  for (auto [kind, lr] : {std::pair{tensor::OptimizerKind::kAdam, 0.01},
                          std::pair{tensor::OptimizerKind::kGradientDescent, 0.001}}) {
    TrainOptions opts;
    opts.optimizer = kind;
    opts.lr = lr;
    VgaeTrainer tr(g, opts, 8);
    double first = 0.0, last = 0.0;
    for (int e = 0; e < 50; ++e) {
      const double l = tr.step().loss;
      if (e < 5) first += l;
      if (e >= 45) last += l;
    }
    CHECK(last < first);
  }
}

TEST_CASE("optimizer updates") {
  Matrix w{{1.0, -2.0}};
  Matrix g{{0.5, -4.0}};
  tensor::Optimizer gd(tensor::OptimizerKind::kGradientDescent, 0.1);
  std::array<Matrix*, 1> ps{&w};
  gd.step(ps, std::array{g});
  CHECK(w(0, 0) == doctest::Approx(0.95));
  CHECK(w(0, 1) == doctest::Approx(-1.6));

  Matrix v{{1.0, -2.0}};
  tensor::Optimizer adam(tensor::OptimizerKind::kAdam, 0.1);
  std::array<Matrix*, 1> pv{&v};
  adam.step(pv, std::array{g});
  CHECK(v(0, 0) == doctest::Approx(0.9));
  CHECK(v(0, 1) == doctest::Approx(-1.9));
  CHECK_THROWS_AS(adam.step(pv, std::array{Matrix(2, 2)}), ShapeError);
  CHECK_THROWS_AS(tensor::parse_optimizer("sgdm"), DomainError);
}

TEST_CASE("checkpoint round trip") {
  testutil::TempDir dir;
  VgaeParams p = init_params(5, {}, 11);
  save_params(p, 11, 42, dir / "vgae.ckpt");
  CHECK(load_params(dir / "vgae.ckpt") == p);

  std::string bytes = testutil::read_file(dir / "vgae.ckpt");
  CHECK(bytes.substr(0, 1) == "{");
  std::ofstream(dir / "short.ckpt", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
  CHECK_THROWS_AS(load_params(dir / "short.ckpt"), ParseError);
  dir.write("bad.ckpt", "not json\n");
  CHECK_THROWS_AS(load_params(dir / "bad.ckpt"), ParseError);
}
