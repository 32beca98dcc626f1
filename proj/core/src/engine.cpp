#include "bri/engine.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>
#include <utility>

namespace bri {

namespace {

constexpr std::size_t row_of(Quadrant q) noexcept { return q == Quadrant::C || q == Quadrant::D; }
constexpr std::size_t col_of(Quadrant q) noexcept { return q == Quadrant::B || q == Quadrant::D; }

constexpr Quadrant at(std::size_t row, std::size_t col) noexcept {
  return row == 0 ? (col == 0 ? Quadrant::A : Quadrant::B) : (col == 0 ? Quadrant::C : Quadrant::D);
}

void discard(Block& block) noexcept { Block dead(std::move(block)); }

// Computes keep - row_partner * pivot^-1 * col_partner where keep = mirror(pivot),
// row_partner shares keep's row and col_partner shares keep's column.
// `produce(q)` yields the operand at quadrant q and is called in the order
// pivot, col_partner, row_partner, keep. `on_singular` must throw.
template <class Produce, class OnSingular>
Block eliminate(Quadrant pivot, Produce&& produce, OpCounters* counters, OnSingular&& on_singular) {
  const Quadrant keep = mirror(pivot);
  const Quadrant row_partner = at(row_of(keep), col_of(pivot));
  const Quadrant col_partner = at(row_of(pivot), col_of(keep));

  Block folded = [&] {
    Block inverse = [&] {
      try {
        return invert_dense(produce(pivot), counters);
      } catch (const SingularBlock&) {
        on_singular();
        throw;
      }
    }();
    const Block col = produce(col_partner);
    return multiply(inverse, col, counters);
  }();

  Block correction = [&] {
    const Block row = produce(row_partner);
    return multiply(row, folded, counters);
  }();
  discard(folded);

  Block result = produce(keep);
  subtract_in_place(result, correction, counters);
  if (counters) ++counters->schur_nodes;
  return result;
}

// Outer (row, col) block indices of quadrant q within a frame.
std::pair<std::size_t, std::size_t> corner(const Frame& frame, Quadrant q) {
  return {row_of(q) ? frame.rows.back() : frame.rows.front(),
          col_of(q) ? frame.cols.back() : frame.cols.front()};
}

class Reducer {
 public:
  Reducer(const BlockProvider& provider, RunContext& context)
      : provider_(provider), context_(context) {}

  Block reduce(const Frame& frame) {
    Block value = frame.size() == 2 ? reduce_leaf(frame) : reduce_internal(frame);
    if (context_.observer) context_.observer(path_, frame, value);
    return value;
  }

 private:
  Block reduce_leaf(const Frame& frame) {
    auto produce = [&](Quadrant q) {
      return provider_.fetch(frame.rows[row_of(q)], frame.cols[col_of(q)], &context_.gauge);
    };
    return eliminate(Quadrant::D, produce, &context_.counters,
                     [&] { fail(frame, Quadrant::D, true); });
  }

  Block reduce_internal(const Frame& frame) {
    const Quad<Frame> children = split_frame(frame);
    auto produce = [&](Quadrant q) {
      path_.push_back(q);
      struct Pop {
        std::vector<Quadrant>& path;
        ~Pop() { path.pop_back(); }
      } pop{path_};
      return reduce(children[q]);
    };
    const Quadrant pivot = mirror(frame.label);
    return eliminate(pivot, produce, &context_.counters, [&] { fail(frame, pivot, false); });
  }

  [[noreturn]] void fail(const Frame& frame, Quadrant pivot, bool leaf) const {
    BranchPath path;
    path.labels = path_;
    path.alpha = context_.alpha;
    path.beta = context_.beta;
    std::tie(path.pivot_row, path.pivot_col) = corner(frame, pivot);
    path.at_leaf = leaf;
    throw SingularPivot(std::move(path));
  }

  const BlockProvider& provider_;
  RunContext& context_;
  std::vector<Quadrant> path_;
};

// Overwrites padding entries of block (alpha, beta) with those of
// the inverse of [[M, 0], [0, I]].
void restore_padding(Block& block, const BlockLayout& layout, std::size_t alpha, std::size_t beta) {
  const std::size_t m = layout.order();
  const std::size_t r0 = layout.offset(alpha);
  const std::size_t c0 = layout.offset(beta);
  for (std::size_t i = 0; i < block.order(); ++i)
    for (std::size_t j = 0; j < block.order(); ++j) {
      const std::size_t gi = r0 + i;
      const std::size_t gj = c0 + j;
      if (gi >= m || gj >= m) block(i, j) = gi == gj ? 1.0 : 0.0;
    }
}

}  // namespace

char to_char(Quadrant q) noexcept { return "ABCD"[static_cast<int>(q)]; }

Frame Frame::root(std::size_t k) {
  if (k < 2) throw FrameTooSmall("root frame needs k >= 2");
  Frame f;
  f.rows.resize(k);
  std::iota(f.rows.begin(), f.rows.end(), std::size_t{1});
  f.cols = f.rows;
  return f;
}

Quad<Frame> split_frame(const Frame& frame) {
  const std::size_t n = frame.size();
  if (n < 3 || frame.cols.size() != n)
    throw FrameTooSmall("cannot split a frame of " + std::to_string(n) + " blocks");

  auto keep_leading = [n](const std::vector<std::size_t>& v) {
    return std::vector<std::size_t>(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n - 1));
  };
  // drop the first index, then swap the new first two so the anchor is second again
  auto drop_first = [](const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out(v.begin() + 1, v.end());
    std::swap(out[0], out[1]);
    return out;
  };

  Quad<Frame> out;
  out.a = Frame{keep_leading(frame.rows), keep_leading(frame.cols), Quadrant::A};
  out.b = Frame{keep_leading(frame.rows), drop_first(frame.cols), Quadrant::B};
  out.c = Frame{drop_first(frame.rows), keep_leading(frame.cols), Quadrant::C};
  out.d = Frame{drop_first(frame.rows), drop_first(frame.cols), Quadrant::D};
  return out;
}

std::string BranchPath::to_string() const {
  std::string labels_text = "root";
  for (Quadrant q : labels) {
    labels_text += '>';
    labels_text += to_char(q);
  }
  return "block (" + std::to_string(alpha) + ", " + std::to_string(beta) + "), path " + labels_text +
         ", depth " + std::to_string(depth()) + ", singular " + (at_leaf ? "leaf" : "internal") +
         " pivot at view block (" + std::to_string(pivot_row) + ", " + std::to_string(pivot_col) +
         ")";
}

SingularPivot::SingularPivot(BranchPath path)
    : Error("singular pivot: " + path.to_string()), path_(std::move(path)) {}

Block schur_eliminate(Quad<Block> g, Quadrant q, OpCounters* counters) {
  const std::size_t b = g.a.order();
  for (Quadrant x : kQuadrants)
    if (g[x].order() != b) throw DimensionMismatch(g[x].order(), b);
  auto produce = [&](Quadrant x) { return std::move(g[x]); };
  return eliminate(q, produce, counters, [&] {
    BranchPath path;
    path.pivot_row = row_of(q) + 1;
    path.pivot_col = col_of(q) + 1;
    path.at_leaf = true;
    throw SingularPivot(std::move(path));
  });
}

Block reduce_frame(const BlockProvider& provider, const Frame& frame, RunContext& context) {
  const std::size_t n = frame.size();
  if (n < 2 || frame.cols.size() != n)
    throw FrameTooSmall("cannot reduce a frame of " + std::to_string(n) + " blocks");
  const auto& layout = provider.layout();
  for (std::size_t i = 0; i < n; ++i)
    if (!layout.contains(frame.rows[i]) || !layout.contains(frame.cols[i]))
      throw IndexOutOfRange("frame index outside 1.." + std::to_string(layout.blocks()));
  return Reducer(provider, context).reduce(frame);
}

Block invert_block(const ProviderPtr& provider, std::size_t alpha, std::size_t beta,
                   RunContext& context, std::optional<PaddingCoupling> coupling) {
  const BlockLayout& layout = provider->layout();
  const bool coupled = layout.padding() > 0 && provider->has_identity_padding();
  if (coupled && !coupling)
    coupling = match_padding_coupling(*provider, kDefaultCouplingSeed, &context.gauge);
  const ProviderPtr base = coupled ? couple_padding(provider, *coupling) : provider;
  const ProviderPtr view = permute_provider(base, alpha, beta);

  context.alpha = alpha;
  context.beta = beta;
  Block reduced = reduce_frame(*view, Frame::root(layout.blocks()), context);
  Block result = invert_dense(std::move(reduced), &context.counters);
  if (coupled) restore_padding(result, layout, alpha, beta);
  return result;
}

InversionSummary invert_full(const ProviderPtr& provider, BlockSink& sink,
                             const FullOptions& options) {
  const BlockLayout& layout = provider->layout();
  const std::size_t k = layout.blocks();
  const std::size_t total = k * k;
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, total);

  Stopwatch clock;
  InversionSummary summary;
  summary.workers = workers;

  std::vector<RunContext> contexts(workers);
  std::optional<PaddingCoupling> coupling = options.coupling;
  if (!coupling && layout.padding() > 0 && provider->has_identity_padding())
    coupling = match_padding_coupling(*provider, options.coupling_seed, &contexts.front().gauge);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto work = [&](RunContext& context) {
    try {
      while (!failed.load()) {
        const std::size_t index = next.fetch_add(1);
        if (index >= total) break;
        const std::size_t alpha = index / k + 1;
        const std::size_t beta = index % k + 1;
        const Block block = invert_block(provider, alpha, beta, context, coupling);
        sink.accept(alpha, beta, block);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      failed.store(true);
    }
  };

  if (workers == 1) {
    work(contexts.front());
  } else {
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (auto& context : contexts) threads.emplace_back(work, std::ref(context));
    for (auto& t : threads) t.join();
  }

  if (error) {
    sink.abort();
    std::rethrow_exception(error);
  }
  sink.finalize();

  for (const auto& context : contexts) {
    summary.counters += context.counters;
    summary.peak_blocks += context.gauge.peak_blocks();
    summary.peak_bytes += context.gauge.peak_bytes();
  }
  summary.blocks_written = total;
  summary.wall_ms = clock.elapsed_ms();
  return summary;
}

}  // namespace bri
