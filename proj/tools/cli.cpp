#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "bri/baseline_lu.hpp"
#include "bri/brim.hpp"
#include "bri/engine.hpp"
#include "bri/error.hpp"
#include "bri/provider.hpp"
#include "bri/random.hpp"
#include "bri/sink.hpp"

namespace bri::cli {
namespace {

class BadFlag : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Config {
  std::string in;
  std::string out;
  std::string inverse;
  std::string csv;
  std::size_t k = 0;
  std::uint64_t seed = 42;
  double tol = 1e-8;
  std::string kind = "randn";
  std::size_t m = 0;
  std::size_t n = 0;
  std::size_t dim = 2;
  double sigma = 1.0;
  double gamma = 1.0;
  std::string method = "bri";
  std::size_t workers = 1;
  std::size_t row = 0;
  std::size_t col = 0;
  std::vector<std::size_t> k_list;
  std::size_t repeat = 3;
  bool json = false;
};

/// Accepts and counts blocks without keeping them; bench measures the
/// inversion, not the output path.
class DiscardSink final : public BlockSink {
 public:
  explicit DiscardSink(std::size_t k) : tally_(k) {}
  void accept(std::size_t alpha, std::size_t beta, const Block&) override {
    std::lock_guard lock(mutex_);
    tally_.mark(alpha, beta);
  }
  void finalize() override { tally_.require_complete(); }

 private:
  BlockTally tally_;
  std::mutex mutex_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw BadFlag(message);
}

void check_k(std::size_t k, std::size_t m) {
  require(k >= 2 && k <= m, "--k must lie in 2.." + std::to_string(m) + " for a matrix of order " +
                                std::to_string(m) + " (got " + std::to_string(k) + ")");
}

nlohmann::ordered_json counters_json(const OpCounters& c) {
  return {{"block_inversions", c.block_inversions},
          {"block_multiplications", c.block_multiplications},
          {"block_subtractions", c.block_subtractions},
          {"schur_nodes", c.schur_nodes}};
}

void report(std::ostream& out, bool json, const nlohmann::ordered_json& summary) {
  if (json) {
    out << summary.dump() << '\n';
    return;
  }
  bool first = true;
  for (const auto& [key, value] : summary.items()) {
    if (value.is_object()) {
      for (const auto& [inner, v] : value.items()) out << ' ' << inner << '=' << v.dump();
      continue;
    }
    out << (first ? "" : " ") << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump());
    first = false;
  }
  out << '\n';
}

int cmd_gen(const Config& c, std::ostream& out) {
  require(!c.out.empty(), "gen needs --out");
  DenseMatrix matrix;
  if (c.kind == "randn") {
    require(c.m >= 1, "gen --kind randn needs --m >= 1");
    matrix = random_normal_matrix(c.m, c.seed, static_cast<double>(c.m));
  } else if (c.kind == "spd") {
    require(c.m >= 1, "gen --kind spd needs --m >= 1");
    matrix = random_spd_matrix(c.m, c.seed);
  } else {
    require(c.n >= 1, "gen --kind lssvm needs --n >= 1");
    require(c.gamma > 0 && c.sigma > 0 && c.dim >= 1, "gen --kind lssvm needs positive --gamma, --sigma, --dim");
    const auto provider = make_kernel_provider(random_kernel_spec(c.n, c.dim, c.gamma, c.sigma, c.seed), 2);
    matrix = materialize(*provider, {.trim = true, .max_order = std::size_t{1} << 16});
  }
  write_matrix(c.out, matrix);
  report(out, c.json, {{"wrote", c.out}, {"kind", c.kind}, {"m", matrix.order()}, {"seed", c.seed}});
  return kOk;
}

int cmd_invert(const Config& c, std::ostream& out) {
  require(!c.in.empty() && !c.out.empty(), "invert needs --in and --out");
  require(c.method == "bri" || c.method == "lu", "--method must be bri or lu");
  require(c.workers >= 1, "--workers must be at least 1");
  const std::size_t m = read_header(c.in).order;

  if (c.method == "lu") {
    BenchRecord record;
    const DenseMatrix inverse = lu_invert_full(read_matrix(c.in), &record);
    write_matrix(c.out, inverse);
    report(out, c.json,
           {{"method", "lu"}, {"m", m}, {"wall_ms", record.wall_ms}, {"peak_bytes", record.peak_bytes},
            {"counters", counters_json(record.counters)}, {"output", c.out}});
    return kOk;
  }

  check_k(c.k, m);
  const auto provider = make_file_provider(c.in, c.k);
  InverseFileSink sink(c.out, provider->layout());
  FullOptions options;
  options.workers = c.workers;
  options.coupling_seed = c.seed;
  const InversionSummary s = invert_full(provider, sink, options);
  report(out, c.json,
         {{"method", "bri"}, {"m", m}, {"k", c.k}, {"b", provider->layout().block_order()},
          {"wall_ms", s.wall_ms}, {"peak_bytes", s.peak_bytes}, {"peak_blocks", s.peak_blocks},
          {"workers", s.workers}, {"counters", counters_json(s.counters)}, {"output", c.out}});
  return kOk;
}

int cmd_invert_block(const Config& c, std::ostream& out) {
  require(!c.in.empty() && !c.out.empty(), "invert-block needs --in and --out");
  const std::size_t m = read_header(c.in).order;
  check_k(c.k, m);
  require(c.row >= 1 && c.row <= c.k && c.col >= 1 && c.col <= c.k,
          "--row and --col must lie in 1.." + std::to_string(c.k));

  const auto provider = make_file_provider(c.in, c.k);
  const std::size_t b = provider->layout().block_order();
  RunContext context;
  DenseMatrix result;
  Stopwatch clock;
  const std::size_t peak = gauge_scope(context.gauge, [&] {
    std::optional<PaddingCoupling> coupling;
    if (provider->layout().padding() > 0) coupling = match_padding_coupling(*provider, c.seed, &context.gauge);
    const Block block = invert_block(provider, c.row, c.col, context, coupling);
    result = DenseMatrix(b, std::vector<double>(block.data().begin(), block.data().end()));
  });
  const double wall_ms = clock.elapsed_ms();
  write_matrix(c.out, result);
  report(out, c.json,
         {{"method", "bri"}, {"m", m}, {"k", c.k}, {"b", b}, {"row", c.row}, {"col", c.col},
          {"wall_ms", wall_ms}, {"peak_blocks", peak}, {"peak_block_bound", 2 * c.k + 4},
          {"peak_bytes", context.gauge.peak_bytes()}, {"counters", counters_json(context.counters)},
          {"output", c.out}});
  return kOk;
}

int cmd_verify(const Config& c, std::ostream& out) {
  require(!c.in.empty(), "verify needs --in");
  require(c.tol >= 0, "--tol must be non-negative");
  const DenseMatrix matrix = read_matrix(c.in);
  const std::size_t m = matrix.order();

  DenseMatrix candidate;
  if (!c.inverse.empty()) {
    candidate = read_matrix(c.inverse);
    require(candidate.order() == m, "--inverse has order " + std::to_string(candidate.order()) +
                                        ", expected " + std::to_string(m));
  } else {
    check_k(c.k, m);
    const auto provider = make_memory_provider(matrix, c.k);
    DenseAssemblySink sink(provider->layout());
    FullOptions options;
    options.workers = c.workers;
    options.coupling_seed = c.seed;
    (void)invert_full(provider, sink, options);
    candidate = sink.take();
  }
  const DenseMatrix reference = lu_invert_full(matrix);

  double worst = -1.0;
  std::size_t wi = 0;
  std::size_t wj = 0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      double diff = std::abs(candidate(i, j) - reference(i, j));
      if (std::isnan(diff)) diff = INFINITY;
      if (diff > worst) {
        worst = diff;
        wi = i;
        wj = j;
      }
    }
  const double scale = max_abs(reference);
  const double error = worst / (scale > 0.0 ? scale : 1.0);
  const bool pass = error <= c.tol;
  report(out, c.json,
         {{"result", pass ? "PASS" : "FAIL"}, {"max_rel_error", error}, {"tol", c.tol},
          {"worst_row", wi}, {"worst_col", wj}, {"got", candidate(wi, wj)}, {"expected", reference(wi, wj)}});
  return pass ? kOk : kVerifyFailed;
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int cmd_bench(const Config& c, std::ostream& out) {
  require(!c.k_list.empty(), "bench needs --k-list");
  require(c.repeat >= 1, "--repeat must be at least 1");
  const std::size_t m = c.in.empty() ? c.m : read_header(c.in).order;
  require(m >= 2, "bench needs --in or --m >= 2");
  for (std::size_t k : c.k_list) check_k(k, m);

  const DenseMatrix matrix =
      c.in.empty() ? random_normal_matrix(m, c.seed, static_cast<double>(m)) : read_matrix(c.in);

  std::vector<BenchRecord> records;
  for (std::size_t r = 0; r < c.repeat; ++r) {
    for (std::size_t k : c.k_list) {
      const ProviderPtr provider = c.in.empty() ? make_memory_provider(matrix, k) : make_file_provider(c.in, k);
      DiscardSink sink(k);
      FullOptions options;
      options.coupling_seed = c.seed;
      const InversionSummary s = invert_full(provider, sink, options);
      records.push_back({Method::bri, m, k, s.wall_ms, s.peak_bytes, s.counters, c.seed});
    }
    BenchRecord lu;
    (void)lu_invert_full(matrix, &lu);
    lu.seed = c.seed;
    records.push_back(lu);
  }

  if (c.csv.empty()) {
    write_bench_csv(out, records);
    return kOk;
  }
  std::ofstream file(c.csv);
  if (!file) throw IoError("cannot open " + c.csv + " for writing");
  write_bench_csv(file, records);
  if (!file.flush()) throw IoError("cannot write " + c.csv);

  std::map<std::pair<int, std::size_t>, std::vector<double>> times;
  std::map<std::pair<int, std::size_t>, std::size_t> peaks;
  for (const auto& rec : records) {
    const auto key = std::make_pair(rec.method == Method::lu ? 1 : 0, rec.k);
    times[key].push_back(rec.wall_ms);
    peaks[key] = rec.peak_bytes;
  }
  for (const auto& [key, samples] : times)
    report(out, c.json,
           {{"method", key.first ? "lu" : "bri"}, {"m", m}, {"k", key.second},
            {"median_wall_ms", median(samples)}, {"peak_bytes", peaks[key]}, {"repeats", samples.size()}});
  return kOk;
}

void add_common(CLI::App* sub, Config& c) {
  sub->add_option("--seed", c.seed, "Seed for generators and the padding coupling")->capture_default_str();
  sub->add_flag("--json", c.json, "Print the summary as one JSON object");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Block recursive inversion of dense matrices stored in BRIM files", "bri"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "Generate a test matrix");
  gen->add_option("--kind", c.kind,
                  "randn: standard normal entries plus m on the diagonal (the shift keeps the matrix "
                  "well conditioned); spd: G G^T + I; lssvm: bordered RBF kernel matrix of order n+1")
      ->check(CLI::IsMember({"randn", "spd", "lssvm"}))
      ->capture_default_str();
  gen->add_option("--m", c.m, "Order for randn and spd");
  gen->add_option("--n", c.n, "Number of kernel inputs for lssvm");
  gen->add_option("--gamma", c.gamma, "Regularization for lssvm")->capture_default_str();
  gen->add_option("--sigma", c.sigma, "RBF bandwidth for lssvm")->capture_default_str();
  gen->add_option("--dim", c.dim, "Input dimension for lssvm")->capture_default_str();
  gen->add_option("--out", c.out, "Output BRIM file")->required();
  add_common(gen, c);

  auto* invert = app.add_subcommand("invert", "Invert a BRIM matrix");
  invert->add_option("--in", c.in, "Input BRIM file")->required();
  invert->add_option("--out", c.out, "Output BRIM file")->required();
  invert->add_option("--k", c.k, "Blocks per side, 2..m (bri only)");
  invert->add_option("--method", c.method, "bri or lu")->check(CLI::IsMember({"bri", "lu"}))->capture_default_str();
  invert->add_option("--workers", c.workers, "Concurrent block runs; peak memory scales with it")
      ->capture_default_str();
  add_common(invert, c);

  auto* block = app.add_subcommand("invert-block", "Compute one block of the inverse");
  block->add_option("--in", c.in, "Input BRIM file")->required();
  block->add_option("--out", c.out, "Output BRIM file of order b")->required();
  block->add_option("--k", c.k, "Blocks per side, 2..m")->required();
  block->add_option("--row", c.row, "Block row, 1..k")->required();
  block->add_option("--col", c.col, "Block column, 1..k")->required();
  add_common(block, c);

  auto* verify = app.add_subcommand("verify", "Compare an inverse against dense LU");
  verify->add_option("--in", c.in, "Input BRIM matrix")->required();
  verify->add_option("--inverse", c.inverse, "Inverse to check; computed with BRI when omitted");
  verify->add_option("--k", c.k, "Blocks per side when computing with BRI");
  verify->add_option("--tol", c.tol, "Relative max-norm tolerance")->capture_default_str();
  verify->add_option("--workers", c.workers, "Concurrent block runs")->capture_default_str();
  add_common(verify, c);

  auto* bench = app.add_subcommand("bench", "Time BRI for several k against LU");
  bench->add_option("--in", c.in, "Input BRIM matrix; a randn matrix of order --m otherwise");
  bench->add_option("--m", c.m, "Order of the generated matrix");
  bench->add_option("--k-list", c.k_list, "Comma separated block counts")->delimiter(',')->required();
  bench->add_option("--repeat", c.repeat, "Repetitions per configuration")->capture_default_str();
  bench->add_option("--csv", c.csv, "CSV output path; stdout when omitted");
  add_common(bench, c);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(c, out);
    if (*invert) return cmd_invert(c, out);
    if (*block) return cmd_invert_block(c, out);
    if (*verify) return cmd_verify(c, out);
    return cmd_bench(c, out);
  } catch (const BadFlag& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SingularPivot& e) {
    err << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const SingularBlock& e) {
    err << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const SingularMatrix& e) {
    err << "error: " << e.what() << '\n';
    return kSingular;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace bri::cli
