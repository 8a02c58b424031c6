// Serial reference kernels vs the OpenMP kernels on layer shapes from the
// default MNIST pipeline.

#include <CLI11.hpp>
#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "tlinv/core/rng.hpp"
#include "tlinv/kernels/kernels.hpp"

using namespace tlinv;
namespace k = tlinv::kernels;

namespace {

Tensor random_tensor(Shape s, Rng& rng) {
  Tensor t(std::move(s));
  for (auto& v : t.values()) v = static_cast<real>(2 * uniform01(rng) - 1);
  return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(double(a[i]) - b[i]));
  return d;
}

double median_ms(int reps, const std::function<void()>& f) {
  std::vector<double> t;
  f();
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    t.push_back(std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count());
  }
  std::nth_element(t.begin(), t.begin() + t.size() / 2, t.end());
  return t[t.size() / 2];
}

struct Row {
  std::string kernel;
  double reference_ms, parallel_ms, max_diff;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reference vs OpenMP kernel timings"};
  int reps = 5, threads = 0, batch = 64;
  std::string csv;
  app.add_option("--reps", reps, "Timed repetitions per kernel")->check(CLI::PositiveNumber);
  app.add_option("--threads", threads, "OpenMP threads (0 keeps the runtime default)");
  app.add_option("--batch", batch, "Batch size")->check(CLI::PositiveNumber);
  app.add_option("--csv", csv, "Also write the table as CSV");
  CLI11_PARSE(app, argc, argv);
  if (threads > 0) omp_set_num_threads(threads);

  Rng rng = make_rng(0, "bench");
  std::vector<Row> rows;

  {
    const int m = 512, n = 512, kk = 576;
    const Tensor a = random_tensor({m, kk}, rng), b = random_tensor({kk, n}, rng);
    Tensor c1({m, n}), c2({m, n});
    const double tr = median_ms(reps, [&] { k::reference::gemm(m, n, kk, a.ptr(), false, b.ptr(), false, c1.ptr()); });
    const double tp = median_ms(reps, [&] { k::gemm_nn(m, n, kk, a.ptr(), b.ptr(), c2.ptr()); });
    rows.push_back({"gemm 512x576x512", tr, tp, max_abs_diff(c1, c2)});
  }
  {
    const Tensor x = random_tensor({batch, 16, 32, 32}, rng), w = random_tensor({32, 16, 3, 3}, rng);
    const Tensor bias = random_tensor({32}, rng);
    const k::Conv2dArgs args{1, 1};
    Tensor y1, y2;
    const double tr = median_ms(reps, [&] { y1 = k::reference::conv2d_forward(x, w, bias, args); });
    const double tp = median_ms(reps, [&] { y2 = k::conv2d_forward(x, w, bias, args); });
    rows.push_back({"conv2d forward 16->32 @32x32", tr, tp, max_abs_diff(y1, y2)});
    const Tensor g = random_tensor(y1.shape(), rng);
    k::ConvGrads g1, g2;
    const double br = median_ms(reps, [&] { g1 = k::reference::conv2d_backward(x, w, g, args, true); });
    const double bp = median_ms(reps, [&] { g2 = k::conv2d_backward(x, w, g, args, true); });
    rows.push_back({"conv2d backward 16->32 @32x32", br, bp,
                    std::max({max_abs_diff(g1.weight, g2.weight), max_abs_diff(g1.input, g2.input)})});
  }
  {
    const Tensor x = random_tensor({batch, 64, 16, 16}, rng), w = random_tensor({64, 32, 4, 4}, rng);
    const Tensor bias = random_tensor({32}, rng);
    const k::Conv2dArgs args{2, 1};
    Tensor y1, y2;
    const double tr = median_ms(reps, [&] { y1 = k::reference::conv_transpose2d_forward(x, w, bias, args); });
    const double tp = median_ms(reps, [&] { y2 = k::conv_transpose2d_forward(x, w, bias, args); });
    rows.push_back({"conv-transpose forward 64->32 @16->32", tr, tp, max_abs_diff(y1, y2)});
    const Tensor g = random_tensor(y1.shape(), rng);
    k::ConvGrads g1, g2;
    const double br = median_ms(reps, [&] { g1 = k::reference::conv_transpose2d_backward(x, w, g, args, true); });
    const double bp = median_ms(reps, [&] { g2 = k::conv_transpose2d_backward(x, w, g, args, true); });
    rows.push_back({"conv-transpose backward 64->32 @16->32", br, bp,
                    std::max({max_abs_diff(g1.weight, g2.weight), max_abs_diff(g1.input, g2.input)})});
  }
  {
    const Tensor x = random_tensor({batch, 32, 32, 32}, rng);
    k::PoolResult p1, p2;
    const double tr = median_ms(reps, [&] { p1 = k::reference::maxpool2d_forward(x, 2); });
    const double tp = median_ms(reps, [&] { p2 = k::maxpool2d_forward(x, 2); });
    rows.push_back({"maxpool 2x2 @32x32x32", tr, tp, max_abs_diff(p1.output, p2.output)});

    const std::vector<real> gamma(32, 1.5f), beta(32, 0.1f);
    k::BatchNormForward f1, f2;
    const double fr = median_ms(reps, [&] { f1 = k::reference::batchnorm_train_forward(x, gamma, beta, 1e-5f); });
    const double fp = median_ms(reps, [&] { f2 = k::batchnorm_train_forward(x, gamma, beta, 1e-5f); });
    rows.push_back({"batchnorm forward @32x32x32", fr, fp, max_abs_diff(f1.output, f2.output)});
  }

  std::printf("threads: %d\n%-40s %12s %12s %8s %10s\n", omp_get_max_threads(), "kernel", "reference ms",
              "parallel ms", "speedup", "max diff");
  for (const Row& r : rows)
    std::printf("%-40s %12.2f %12.2f %8.2f %10.2e\n", r.kernel.c_str(), r.reference_ms, r.parallel_ms,
                r.reference_ms / r.parallel_ms, r.max_diff);
  if (!csv.empty()) {
    std::ofstream out(csv);
    out << "kernel,reference_ms,parallel_ms,speedup,max_abs_diff,threads\n";
    for (const Row& r : rows)
      out << r.kernel << ',' << r.reference_ms << ',' << r.parallel_ms << ',' << r.reference_ms / r.parallel_ms << ','
          << r.max_diff << ',' << omp_get_max_threads() << '\n';
  }
  return 0;
}
