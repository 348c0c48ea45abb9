#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "inrv/adam.hpp"
#include "inrv/alloc.hpp"
#include "inrv/conv.hpp"
#include "inrv/rng.hpp"
#include "inrv/tensor.hpp"
#include "support/oracles.hpp"

using inrv::Tensor;

namespace {

std::vector<double> random_vec(std::size_t n, inrv::Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

}  // namespace

TEST_CASE("matmul identity and hand-expanded product") {
  const std::vector<double> eye{1, 0, 0, 0, 1, 0, 0, 0, 1};
  inrv::Rng rng(3);
  const auto b_vals = random_vec(3 * 5, rng);
  auto i3 = Tensor<double>::from_data({3, 3}, eye);
  auto b = Tensor<double>::from_data({3, 5}, b_vals);
  auto prod = inrv::matmul(i3, b);
  for (std::size_t i = 0; i < b_vals.size(); ++i) CHECK(prod.values()[i] == doctest::Approx(b_vals[i]));

  auto a = Tensor<double>::from_data({2, 2}, std::vector<double>{1, 2, 3, 4});
  auto ones = Tensor<double>::from_data({2, 1}, std::vector<double>{1, 1});
  auto c = inrv::matmul(a, ones);
  CHECK(c.values()[0] == doctest::Approx(3));
  CHECK(c.values()[1] == doctest::Approx(7));
}

TEST_CASE("matmul rejects mismatched inner dims") {
  auto a = Tensor<double>::zeros({2, 3});
  auto b = Tensor<double>::zeros({2, 2});
  CHECK_THROWS_AS(inrv::matmul(a, b), inrv::dim_error);
}

TEST_CASE("gradient of sum(A*B) w.r.t. A equals ones x B^T") {
  inrv::Rng rng(7);
  const auto a_vals = random_vec(2 * 3, rng);
  const auto b_vals = random_vec(3 * 4, rng);
  auto a = Tensor<double>::from_data({2, 3}, a_vals, true);
  auto b = Tensor<double>::from_data({3, 4}, b_vals);
  auto loss = inrv::sum(inrv::matmul(a, b));
  inrv::backward(loss);

  // analytic expectation: dA[i,j] = sum_k B[j,k]
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 3; ++j) {
      double expect = 0.0;
      for (int k = 0; k < 4; ++k) expect += b_vals[j * 4 + k];
      CHECK(a.grad()[i * 3 + j] == doctest::Approx(expect));
    }

  // finite-difference oracle
  auto f = [&](const std::vector<double>& x) {
    auto at = Tensor<double>::from_data({2, 3}, x);
    auto bt = Tensor<double>::from_data({3, 4}, b_vals);
    return inrv::sum(inrv::matmul(at, bt)).item();
  };
  const auto fd = oracle::finite_diff(f, a_vals);
  for (std::size_t i = 0; i < fd.size(); ++i) {
    CHECK(oracle::rel_err(a.grad()[i], fd[i]) < 1e-6);
  }
}

TEST_CASE("sine activation values and gradient") {
  auto zero = Tensor<double>::from_data({3}, std::vector<double>{0, 0, 0});
  for (double omega : {0.5, 1.0, 30.0}) {
    auto y = inrv::sine(zero, omega);
    for (auto v : y.values()) CHECK(v == 0.0);
  }
  auto x = Tensor<double>::scalar(3.14159265358979323846 / 2.0);
  CHECK(inrv::sine(x, 1.0).item() == doctest::Approx(1.0));

  CHECK_THROWS_AS(inrv::sine(x, 0.0), inrv::numeric_error);

  inrv::Rng rng(11);
  const auto vals = random_vec(6, rng);
  const double omega = 2.5;
  auto xs = Tensor<double>::from_data({6}, vals, true);
  auto loss = inrv::sum(inrv::sine(xs, omega));
  inrv::backward(loss);
  auto f = [&](const std::vector<double>& v) {
    return inrv::sum(inrv::sine(Tensor<double>::from_data({6}, v), omega)).item();
  };
  const auto fd = oracle::finite_diff(f, vals);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(oracle::rel_err(xs.grad()[i], fd[i]) < 1e-6);
}

TEST_CASE("sine float path matches std::sin") {
  // the fast-math kernel must agree with the strict libm path
  inrv::Rng rng(5);
  std::vector<float> vals(1000);
  for (auto& v : vals) v = static_cast<float>(rng.uniform(-4.0, 4.0));
  auto x = Tensor<float>::from_data({1000}, vals);
  auto y = inrv::sine(x, 30.0f);
  for (std::size_t i = 0; i < vals.size(); ++i) {
    CHECK(std::abs(y.values()[i] - std::sin(30.0f * vals[i])) < 2e-6f);
  }
}

TEST_CASE("relu forward and gradient") {
  auto x = Tensor<double>::from_data({3}, std::vector<double>{-1, 0, 2});
  auto y = inrv::relu(x);
  CHECK(y.values()[0] == 0.0);
  CHECK(y.values()[1] == 0.0);
  CHECK(y.values()[2] == 2.0);

  auto neg = Tensor<double>::from_data({4}, std::vector<double>{-3, -2, -1, -0.5}, true);
  auto loss = inrv::sum(inrv::relu(neg));
  inrv::backward(loss);
  for (auto g : neg.grad()) CHECK(g == 0.0);

  inrv::Rng rng(13);
  std::vector<double> vals = random_vec(8, rng);
  for (auto& v : vals)
    if (std::abs(v) < 0.05) v = 0.3;  // stay away from the kink
  auto xs = Tensor<double>::from_data({8}, vals, true);
  auto l2 = inrv::sum(inrv::relu(xs));
  inrv::backward(l2);
  auto f = [&](const std::vector<double>& v) {
    return inrv::sum(inrv::relu(Tensor<double>::from_data({8}, v))).item();
  };
  const auto fd = oracle::finite_diff(f, vals);
  for (std::size_t i = 0; i < fd.size(); ++i) CHECK(oracle::rel_err(xs.grad()[i], fd[i]) < 1e-6);
}

TEST_CASE("mse_loss values match scalar recomputation") {
  auto a = Tensor<double>::from_data({2}, std::vector<double>{0, 0});
  auto b = Tensor<double>::from_data({2}, std::vector<double>{1, 1});
  CHECK(inrv::mse_loss(a, b).item() == doctest::Approx(1.0));
  CHECK(inrv::mse_loss(b, b).item() == 0.0);

  inrv::Rng rng(17);
  const auto p = random_vec(64, rng);
  const auto t = random_vec(64, rng);
  double expect = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) expect += (p[i] - t[i]) * (p[i] - t[i]);
  expect /= static_cast<double>(p.size());
  auto loss = inrv::mse_loss(Tensor<double>::from_data({64}, p), Tensor<double>::from_data({64}, t));
  CHECK(loss.item() == doctest::Approx(expect).epsilon(1e-12));

  CHECK_THROWS_AS(inrv::mse_loss(a, Tensor<double>::zeros({3})), inrv::dim_error);
}

TEST_CASE("backward: sum seeds ones, disconnected grads stay zero") {
  auto x = Tensor<double>::from_data({5}, std::vector<double>{1, 2, 3, 4, 5}, true);
  auto unused = Tensor<double>::zeros({3}, true);
  auto loss = inrv::sum(x);
  inrv::backward(loss);
  for (auto g : x.grad()) CHECK(g == 1.0);
  for (auto g : unused.grad()) CHECK(g == 0.0);
}

TEST_CASE("backward on non-scalar or twice is an error") {
  auto x = Tensor<double>::from_data({2}, std::vector<double>{1, 2}, true);
  CHECK_THROWS_AS(inrv::backward(x), inrv::dim_error);
  auto loss = inrv::sum(x);
  inrv::backward(loss);
  CHECK_THROWS_AS(inrv::backward(loss), inrv::numeric_error);
}

TEST_CASE("backward through a siren-style layer matches finite differences") {
  // loss = mse(sin(omega*(W x) + b), t)
  inrv::Rng rng(23);
  const int n = 4, in_dim = 3, width = 5;
  const auto x_vals = random_vec(n * in_dim, rng);
  const auto w_vals = random_vec(in_dim * width, rng, -0.5, 0.5);
  const auto b_vals = random_vec(width, rng, -0.5, 0.5);
  const auto t_vals = random_vec(n * width, rng);
  const double omega = 1.7;

  auto run = [&](const std::vector<double>& w, const std::vector<double>& b, bool want_grad,
                 std::vector<double>* gw, std::vector<double>* gb) {
    auto xt = Tensor<double>::from_data({n, in_dim}, x_vals);
    auto wt = Tensor<double>::from_data({in_dim, width}, w, want_grad);
    auto bt = Tensor<double>::from_data({width}, b, want_grad);
    auto tt = Tensor<double>::from_data({n, width}, t_vals);
    auto y = inrv::sine(inrv::add_bias(inrv::scale(inrv::matmul(xt, wt), omega), bt), 1.0);
    auto loss = inrv::mse_loss(y, tt);
    if (want_grad) {
      inrv::backward(loss);
      gw->assign(wt.grad().begin(), wt.grad().end());
      gb->assign(bt.grad().begin(), bt.grad().end());
    }
    return loss.item();
  };

  std::vector<double> gw, gb;
  run(w_vals, b_vals, true, &gw, &gb);

  const auto fd_w = oracle::finite_diff(
      [&](const std::vector<double>& w) { return run(w, b_vals, false, nullptr, nullptr); }, w_vals);
  const auto fd_b = oracle::finite_diff(
      [&](const std::vector<double>& b) { return run(w_vals, b, false, nullptr, nullptr); }, b_vals);
  for (std::size_t i = 0; i < fd_w.size(); ++i) CHECK(oracle::rel_err(gw[i], fd_w[i]) < 1e-4);
  for (std::size_t i = 0; i < fd_b.size(); ++i) CHECK(oracle::rel_err(gb[i], fd_b[i]) < 1e-4);
}

TEST_CASE("non-finite op output raises") {
  auto big = Tensor<double>::from_data({1}, std::vector<double>{1e308});
  auto big2 = Tensor<double>::from_data({1}, std::vector<double>{1e308});
  CHECK_THROWS_AS(inrv::add(big, big2), inrv::numeric_error);
  CHECK_THROWS_AS(
      Tensor<double>::from_data({1}, std::vector<double>{std::numeric_limits<double>::quiet_NaN()}),
      inrv::numeric_error);
}

TEST_CASE("conv2d: 1x1 identity kernel and one-hot box response") {
  inrv::Rng rng(29);
  const auto img = random_vec(5 * 5, rng, 0.0, 1.0);
  auto x = Tensor<double>::from_data({1, 5, 5}, img);
  auto k1 = Tensor<double>::from_data({1, 1, 1, 1}, std::vector<double>{1});
  auto y = inrv::conv2d(x, k1, 1, 0);
  for (std::size_t i = 0; i < img.size(); ++i) CHECK(y.values()[i] == doctest::Approx(img[i]));

  std::vector<double> hot(5 * 5, 0.0);
  hot[2 * 5 + 2] = 1.0;  // center
  auto xh = Tensor<double>::from_data({1, 5, 5}, hot);
  auto kones = Tensor<double>::from_data({1, 1, 3, 3}, std::vector<double>(9, 1.0));
  auto yh = inrv::conv2d(xh, kones, 1, 1);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      const bool in_box = std::abs(i - 2) <= 1 && std::abs(j - 2) <= 1;
      CHECK(yh.values()[i * 5 + j] == doctest::Approx(in_box ? 1.0 : 0.0));
    }
}

TEST_CASE("conv2d equals the six-nested-loop oracle exactly") {
  inrv::Rng rng(31);
  const int c = 2, f = 3, kh = 3, kw = 3;
  for (int stride : {1, 2}) {
    const int h = stride == 1 ? 8 : 9, w = h;  // output size must divide evenly
    for (int pad : {0, 1}) {
      const auto img = random_vec(c * h * w, rng);
      const auto ker = random_vec(f * c * kh * kw, rng);
      auto y = inrv::conv2d(Tensor<double>::from_data({c, h, w}, img),
                            Tensor<double>::from_data({f, c, kh, kw}, ker), stride, pad);
      int oh = 0, ow = 0;
      const auto ref = oracle::conv2d_naive(img, c, h, w, ker, f, kh, kw, stride, pad, &oh, &ow);
      REQUIRE(y.shape() == std::vector<std::int64_t>{f, oh, ow});
      for (std::size_t i = 0; i < ref.size(); ++i) {
        CHECK(std::abs(y.values()[i] - ref[i]) < 1e-12);
      }
    }
  }
}

TEST_CASE("conv2d invalid geometry raises") {
  auto x = Tensor<double>::zeros({1, 5, 5});
  auto k = Tensor<double>::zeros({1, 1, 3, 3});
  auto x4 = Tensor<double>::zeros({1, 4, 4});
  CHECK_THROWS_AS(inrv::conv2d(x4, k, 2, 0), inrv::dim_error);  // (4-3) % 2 != 0
  auto keven = Tensor<double>::zeros({1, 1, 2, 2});
  CHECK_THROWS_AS(inrv::conv2d(x, keven, 1, 0), inrv::dim_error);
}

TEST_CASE("conv2d gradients match finite differences") {
  inrv::Rng rng(37);
  const int c = 2, h = 5, w = 5, f = 2, kh = 3, kw = 3;
  const auto img = random_vec(c * h * w, rng);
  const auto ker = random_vec(f * c * kh * kw, rng);

  auto run = [&](const std::vector<double>& iv, const std::vector<double>& kv, bool want,
                 std::vector<double>* gi, std::vector<double>* gk) {
    auto x = Tensor<double>::from_data({c, h, w}, iv, want);
    auto k = Tensor<double>::from_data({f, c, kh, kw}, kv, want);
    auto loss = inrv::sum(inrv::conv2d(x, k, 1, 1));
    if (want) {
      inrv::backward(loss);
      gi->assign(x.grad().begin(), x.grad().end());
      gk->assign(k.grad().begin(), k.grad().end());
    }
    return loss.item();
  };
  std::vector<double> gi, gk;
  run(img, ker, true, &gi, &gk);
  const auto fd_i = oracle::finite_diff(
      [&](const std::vector<double>& v) { return run(v, ker, false, nullptr, nullptr); }, img);
  const auto fd_k = oracle::finite_diff(
      [&](const std::vector<double>& v) { return run(img, v, false, nullptr, nullptr); }, ker);
  for (std::size_t i = 0; i < fd_i.size(); ++i) CHECK(oracle::rel_err(gi[i], fd_i[i]) < 1e-4);
  for (std::size_t i = 0; i < fd_k.size(); ++i) CHECK(oracle::rel_err(gk[i], fd_k[i]) < 1e-4);
}

TEST_CASE("deconv2d shape contract and adjoint identity") {
  auto x = Tensor<double>::zeros({1, 8, 8});
  auto k = Tensor<double>::zeros({1, 1, 4, 4});
  auto y = inrv::deconv2d(x, k, 2, 1);
  CHECK(y.shape() == std::vector<std::int64_t>{1, 16, 16});
  for (auto v : y.values()) CHECK(v == 0.0);  // zero input -> zero output

  // <conv(x,K), y> == <x, deconv(y,K)> on random instances
  inrv::Rng rng(41);
  const int c1 = 2, c2 = 3, h = 6, w = 6, kh = 3, kw = 3, stride = 1, pad = 1;
  const auto xv = random_vec(c2 * h * w, rng);
  const auto kv = random_vec(c1 * c2 * kh * kw, rng);  // conv kernels [c1 out, c2 in]
  auto xt = Tensor<double>::from_data({c2, h, w}, xv);
  auto kt_conv = Tensor<double>::from_data({c1, c2, kh, kw}, kv);
  auto cx = inrv::conv2d(xt, kt_conv, stride, pad);

  const auto yv = random_vec(cx.size(), rng);
  auto yt = Tensor<double>::from_data(cx.shape(), yv);
  auto kt_deconv = Tensor<double>::from_data({c1, c2, kh, kw}, kv);  // same buffer layout
  auto dy = inrv::deconv2d(yt, kt_deconv, stride, pad);
  REQUIRE(dy.shape() == xt.shape());

  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) lhs += cx.values()[i] * yv[i];
  for (std::size_t i = 0; i < xv.size(); ++i) rhs += xv[i] * dy.values()[i];
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("deconv2d adjoint identity with stride 2") {
  inrv::Rng rng(43);
  const int c1 = 2, c2 = 2, h = 5, w = 5, kh = 3, kw = 3, stride = 2, pad = 1;
  const auto kv = random_vec(c1 * c2 * kh * kw, rng);
  // conv: [c2, 9, 9] -> [c1, 5, 5]
  const auto xv = random_vec(c2 * 9 * 9, rng);
  auto cx = inrv::conv2d(Tensor<double>::from_data({c2, 9, 9}, xv),
                         Tensor<double>::from_data({c1, c2, kh, kw}, kv), stride, pad);
  REQUIRE(cx.shape() == std::vector<std::int64_t>{c1, h, w});
  const auto yv = random_vec(cx.size(), rng);
  auto dy = inrv::deconv2d(Tensor<double>::from_data({c1, h, w}, yv),
                           Tensor<double>::from_data({c1, c2, kh, kw}, kv), stride, pad);
  REQUIRE(dy.shape() == std::vector<std::int64_t>{c2, 9, 9});
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < yv.size(); ++i) lhs += cx.values()[i] * yv[i];
  for (std::size_t i = 0; i < xv.size(); ++i) rhs += xv[i] * dy.values()[i];
  CHECK(std::abs(lhs - rhs) < 1e-10);
}

TEST_CASE("deconv2d gradients match finite differences") {
  inrv::Rng rng(47);
  const int c = 2, f = 2, h = 4, w = 4, kh = 4, kw = 4;
  const auto iv = random_vec(c * h * w, rng);
  const auto kv = random_vec(c * f * kh * kw, rng);
  auto run = [&](const std::vector<double>& i_, const std::vector<double>& k_, bool want,
                 std::vector<double>* gi, std::vector<double>* gk) {
    auto x = Tensor<double>::from_data({c, h, w}, i_, want);
    auto k = Tensor<double>::from_data({c, f, kh, kw}, k_, want);
    auto loss = inrv::sum(inrv::deconv2d(x, k, 2, 1));
    if (want) {
      inrv::backward(loss);
      gi->assign(x.grad().begin(), x.grad().end());
      gk->assign(k.grad().begin(), k.grad().end());
    }
    return loss.item();
  };
  std::vector<double> gi, gk;
  run(iv, kv, true, &gi, &gk);
  const auto fd_i = oracle::finite_diff(
      [&](const std::vector<double>& v) { return run(v, kv, false, nullptr, nullptr); }, iv);
  const auto fd_k = oracle::finite_diff(
      [&](const std::vector<double>& v) { return run(iv, v, false, nullptr, nullptr); }, kv);
  for (std::size_t i = 0; i < fd_i.size(); ++i) CHECK(oracle::rel_err(gi[i], fd_i[i]) < 1e-4);
  for (std::size_t i = 0; i < fd_k.size(); ++i) CHECK(oracle::rel_err(gk[i], fd_k[i]) < 1e-4);
}

TEST_CASE("concat_channels stacking and gradient routing") {
  inrv::Rng rng(53);
  const auto a_vals = random_vec(16 * 2 * 2, rng);
  const auto b_vals = random_vec(16 * 2 * 2, rng);
  auto a = Tensor<double>::from_data({16, 2, 2}, a_vals, true);
  auto b = Tensor<double>::from_data({16, 2, 2}, b_vals, true);
  auto cat = inrv::concat_channels<double>({a, b});
  CHECK(cat.shape() == std::vector<std::int64_t>{32, 2, 2});

  auto single = inrv::concat_channels<double>({a});
  for (std::size_t i = 0; i < a_vals.size(); ++i) CHECK(single.values()[i] == a_vals[i]);

  auto loss = inrv::sum(cat);
  inrv::backward(loss);
  for (auto g : a.grad()) CHECK(g == 1.0);
  for (auto g : b.grad()) CHECK(g == 1.0);

  auto c = Tensor<double>::zeros({4, 3, 3});
  CHECK_THROWS_AS(inrv::concat_channels<double>({a, c}), inrv::dim_error);
}

TEST_CASE("adam: zero gradient leaves parameters unchanged") {
  auto p = Tensor<float>::from_data({4}, std::vector<float>{1, -2, 3, -4}, true);
  inrv::AdamOptimizer<float> opt({p}, 0.1f);
  for (int i = 0; i < 5; ++i) {
    opt.zero_grad();
    opt.step();
  }
  CHECK(p.values()[0] == 1.0f);
  CHECK(p.values()[3] == -4.0f);
}

TEST_CASE("adam first step moves by -lr*sign(g)") {
  const double lr = 0.05;
  auto p = Tensor<double>::from_data({3}, std::vector<double>{1.0, 2.0, 3.0}, true);
  auto g = p.grad_mut();
  g[0] = 0.7;
  g[1] = -0.02;
  g[2] = 1e3;
  inrv::AdamState<double> state(3);
  inrv::adam_step<double>(p.values_mut(), p.grad(), state, lr);
  CHECK(p.values()[0] == doctest::Approx(1.0 - lr).epsilon(1e-6));
  CHECK(p.values()[1] == doctest::Approx(2.0 + lr).epsilon(1e-6));
  CHECK(p.values()[2] == doctest::Approx(3.0 - lr).epsilon(1e-6));
  CHECK(state.step_count == 1);
}

TEST_CASE("adam matches scalar reference and converges on (w-3)^2") {
  // library trajectory equals the independent scalar implementation
  oracle::ScalarAdam ref;
  double w_ref = 0.0;
  auto p = Tensor<double>::from_data({1}, std::vector<double>{0.0}, true);
  inrv::AdamState<double> state(1);
  for (int i = 0; i < 200; ++i) {
    const double w = p.values()[0];
    const double g = 2.0 * (w - 3.0);
    p.zero_grad();
    p.grad_mut()[0] = g;
    inrv::adam_step<double>(p.values_mut(), p.grad(), state, 0.1);
    const double g_ref = 2.0 * (w_ref - 3.0);
    w_ref = ref.step(w_ref, g_ref, 0.1);
    CHECK(p.values()[0] == doctest::Approx(w_ref).epsilon(1e-12));
  }
  CHECK(std::abs(p.values()[0] - 3.0) < 0.05);
}

TEST_CASE("adam rejects non-finite gradients") {
  auto p = Tensor<double>::from_data({1}, std::vector<double>{0.0}, true);
  p.grad_mut()[0] = std::numeric_limits<double>::infinity();
  inrv::AdamState<double> state(1);
  auto vals = p.values_mut();
  CHECK_THROWS_AS(inrv::adam_step<double>(vals, p.grad(), state, 0.1), inrv::numeric_error);
}

TEST_CASE("memory accounting tracks tensor buffers") {
  inrv::memory::reset_peak();
  const auto before = inrv::memory::peak_bytes();
  {
    auto t = Tensor<float>::zeros({1000});
    CHECK(inrv::memory::peak_bytes() >= before + 4000);
  }
  const auto peak_after = inrv::memory::peak_bytes();
  CHECK(peak_after >= before + 4000);  // peak survives the free
  CHECK(inrv::memory::current_bytes() < peak_after);
}

TEST_CASE("fixed seed gives identical training steps") {
  auto run = [&] {
    inrv::Rng rng(99);
    std::vector<double> xv(8), tv(8);
    for (auto& v : xv) v = rng.uniform(-1, 1);
    for (auto& v : tv) v = rng.uniform(0, 1);
    auto w = Tensor<double>::from_data({1, 1}, std::vector<double>{rng.uniform(-1, 1)}, true);
    inrv::AdamOptimizer<double> opt({w}, 0.01);
    double last = 0.0;
    for (int i = 0; i < 50; ++i) {
      opt.zero_grad();
      auto x = Tensor<double>::from_data({8, 1}, xv);
      auto t = Tensor<double>::from_data({8, 1}, tv);
      auto loss = inrv::mse_loss(inrv::matmul(x, w), t);
      inrv::backward(loss);
      opt.step();
      last = loss.item();
    }
    return std::make_pair(w.values()[0], last);
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
}
