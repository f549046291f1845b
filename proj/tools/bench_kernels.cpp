// Timing harness comparing the serial reference kernels against the
// OpenMP/cache-aware ones on production-sized workloads. Also re-checks, on
// every shape it times, that the two families agree bit for bit.
//
//   bench_kernels [--batch N] [--repeat-seconds S]

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "rcids/nn/kernels.hpp"
#include "rcids/rng.hpp"

using namespace rcids;
using Clock = std::chrono::steady_clock;

namespace {

std::vector<float> random_buffer(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> v(n);
  for (float& x : v) x = static_cast<float>(rng.uniform(-1.0, 1.0));
  return v;
}

// Runs fn repeatedly until `budget` seconds elapse; returns seconds per call.
template <typename Fn>
double time_call(Fn&& fn, double budget) {
  fn();  // warmup / first-touch
  int iters = 0;
  auto start = Clock::now();
  double elapsed = 0.0;
  do {
    fn();
    ++iters;
    elapsed = std::chrono::duration<double>(Clock::now() - start).count();
  } while (elapsed < budget);
  return elapsed / iters;
}

struct Row {
  std::string name;
  double flops = 0;      // per call
  double serial_s = 0;
  double parallel_s = 0;
  bool identical = false;
};

void print_rows(const std::vector<Row>& rows) {
  std::printf("%-28s %10s %10s %10s %8s %6s\n", "kernel", "GFLOP", "serial", "parallel",
              "speedup", "equal");
  for (const Row& r : rows) {
    std::printf("%-28s %10.3f %8.1fms %8.1fms %7.2fx %6s\n", r.name.c_str(), r.flops / 1e9,
                r.serial_s * 1e3, r.parallel_s * 1e3, r.serial_s / r.parallel_s,
                r.identical ? "yes" : "NO");
  }
}

}  // namespace

int main(int argc, char** argv) {
  size_t batch = 8;
  double budget = 0.4;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--batch" && i + 1 < argc) batch = std::stoul(argv[++i]);
    else if (arg == "--repeat-seconds" && i + 1 < argc) budget = std::stod(argv[++i]);
    else {
      std::fprintf(stderr, "usage: bench_kernels [--batch N] [--repeat-seconds S]\n");
      return 2;
    }
  }

  std::vector<Row> rows;

  // The two convolution stages of the road-context CNN.
  struct ConvCase {
    const char* name;
    size_t in_h, in_w, in_c, out_c, stride;
  };
  for (const ConvCase& c : {ConvCase{"conv 100x100x3->24 s2", 100, 100, 3, 24, 2},
                            ConvCase{"conv 50x50x24->64 s2", 50, 50, 24, 64, 2}}) {
    ConvShape s = conv_geometry(batch, c.in_h, c.in_w, c.in_c, 3, 3, c.out_c, c.stride);
    size_t xs = batch * c.in_h * c.in_w * c.in_c;
    size_t ws = 9 * c.in_c * c.out_c;
    size_t ys = batch * s.out_h * s.out_w * c.out_c;
    std::vector<float> x = random_buffer(xs, 1), w = random_buffer(ws, 2);
    std::vector<float> b = random_buffer(c.out_c, 3), dy = random_buffer(ys, 4);
    std::vector<float> y0(ys), y1(ys), dx0(xs), dx1(xs);
    std::vector<float> dw0(ws), dw1(ws), db0(c.out_c), db1(c.out_c);
    double fwd_flops = 2.0 * ys * 9 * c.in_c;

    Row fwd{std::string(c.name) + " fwd", fwd_flops, 0, 0, false};
    fwd.serial_s = time_call(
        [&] { kernels::ref::conv2d_forward(x.data(), w.data(), b.data(), y0.data(), s); },
        budget);
    fwd.parallel_s = time_call(
        [&] { kernels::fast::conv2d_forward(x.data(), w.data(), b.data(), y1.data(), s); },
        budget);
    fwd.identical = std::memcmp(y0.data(), y1.data(), ys * sizeof(float)) == 0;
    rows.push_back(fwd);

    Row bwd{std::string(c.name) + " bwd", 2 * fwd_flops, 0, 0, false};
    bwd.serial_s = time_call(
        [&] {
          kernels::ref::conv2d_backward_input(dy.data(), w.data(), dx0.data(), s);
          kernels::ref::conv2d_backward_params(x.data(), dy.data(), dw0.data(), db0.data(), s);
        },
        budget);
    bwd.parallel_s = time_call(
        [&] {
          kernels::fast::conv2d_backward_input(dy.data(), w.data(), dx1.data(), s);
          kernels::fast::conv2d_backward_params(x.data(), dy.data(), dw1.data(), db1.data(), s);
        },
        budget);
    bwd.identical = std::memcmp(dx0.data(), dx1.data(), xs * sizeof(float)) == 0 &&
                    std::memcmp(dw0.data(), dw1.data(), ws * sizeof(float)) == 0;
    rows.push_back(bwd);
  }

  // The big flatten->dense layer, which dominates training time.
  {
    size_t in = 40000, out = 500;
    std::vector<float> x = random_buffer(batch * in, 5), w = random_buffer(in * out, 6);
    std::vector<float> b = random_buffer(out, 7), dy = random_buffer(batch * out, 8);
    std::vector<float> y0(batch * out), y1(batch * out);
    std::vector<float> dx0(batch * in), dx1(batch * in);
    std::vector<float> dw0(in * out), dw1(in * out), db0(out), db1(out);
    double fwd_flops = 2.0 * batch * in * out;

    Row fwd{"dense 40000->500 fwd", fwd_flops, 0, 0, false};
    fwd.serial_s = time_call(
        [&] { kernels::ref::dense_forward(x.data(), w.data(), b.data(), y0.data(), batch, in, out); },
        budget);
    fwd.parallel_s = time_call(
        [&] { kernels::fast::dense_forward(x.data(), w.data(), b.data(), y1.data(), batch, in, out); },
        budget);
    fwd.identical = std::memcmp(y0.data(), y1.data(), y0.size() * sizeof(float)) == 0;
    rows.push_back(fwd);

    Row bwd{"dense 40000->500 bwd", 2 * fwd_flops, 0, 0, false};
    bwd.serial_s = time_call(
        [&] {
          kernels::ref::dense_backward_input(dy.data(), w.data(), dx0.data(), batch, in, out);
          kernels::ref::dense_backward_params(x.data(), dy.data(), dw0.data(), db0.data(), batch,
                                              in, out);
        },
        budget);
    bwd.parallel_s = time_call(
        [&] {
          kernels::fast::dense_backward_input(dy.data(), w.data(), dx1.data(), batch, in, out);
          kernels::fast::dense_backward_params(x.data(), dy.data(), dw1.data(), db1.data(), batch,
                                               in, out);
        },
        budget);
    bwd.identical = std::memcmp(dx0.data(), dx1.data(), dx0.size() * sizeof(float)) == 0 &&
                    std::memcmp(dw0.data(), dw1.data(), dw0.size() * sizeof(float)) == 0;
    rows.push_back(bwd);
  }

  print_rows(rows);
  bool all_equal = true;
  for (const Row& r : rows) all_equal = all_equal && r.identical;
  if (!all_equal) {
    std::fprintf(stderr, "bit-identity violated between serial and parallel kernels\n");
    return 1;
  }
  return 0;
}
