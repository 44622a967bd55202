#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fraclab/dynamics.hpp"

namespace fraclab {

enum class Split { Train, Validation, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

inline constexpr std::string_view kCorpusFormatVersion = "fraclab-corpus-1";
inline constexpr std::size_t kDefaultPadLength = 50;
inline constexpr int kMinRawLength = 10;
inline constexpr int kX0Bins = 5;

// Split draws u in [0, 1): u <= 0.20 -> Test, u <= 0.35 -> Validation.
inline constexpr double kTestThreshold = 0.20;
inline constexpr double kValidationThreshold = 0.35;

inline Split split_for(double u) {
  if (u <= kTestThreshold) return Split::Test;
  if (u <= kValidationThreshold) return Split::Validation;
  return Split::Train;
}

struct GridSpec {
  MapKind kind = MapKind::Delayed;
  double mu_lo = 0.0;
  double mu_hi = 2.0;
  double mu_step = 0.001;
  double nu_lo = 0.01;
  double nu_hi = 1.0;
  double nu_step = 0.01;
  int replicates_per_pair = 5;
  int len_lo = 10;
  int len_hi = 50;
  double x0_resolution = 0.01;

  std::size_t mu_count() const;
  std::size_t nu_count() const;
  double mu_at(std::size_t i) const;
  double nu_at(std::size_t i) const;
  /// Throws DomainError on any violated constraint.
  void validate(std::size_t pad_length) const;

  bool operator==(const GridSpec&) const = default;
};

/// Named grids: paper-delayed, paper-plain, desk, desk-plain.
GridSpec preset_grid(std::string_view name);
std::vector<std::string> preset_names();

struct TrajectoryRecord {
  MapKind kind = MapKind::Delayed;
  double mu = 0.0;
  double nu = 1.0;
  double x0 = 0.0;
  int raw_length = 0;
  Split split = Split::Train;
  bool truncated = false;
  std::vector<double> padded;  // zeros, then the raw_length trajectory values

  std::span<const double> raw_values() const {
    return std::span<const double>(padded).last(
        static_cast<std::size_t>(raw_length));
  }
};

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
  std::size_t total() const { return train + validation + test; }
  void add(Split s);
  std::size_t& operator[](Split s);
  std::size_t operator[](Split s) const;
  bool operator==(const SplitCounts&) const = default;
};

struct CorpusManifest {
  GridSpec grid;
  std::uint64_t master_seed = 0;
  std::size_t pad_length = kDefaultPadLength;
  SplitCounts counts;
  std::string format_version{kCorpusFormatVersion};
};

/// Zeros on the left up to pad_length. RangeError if values is longer.
std::vector<double> pad_left(std::span<const double> values,
                             std::size_t pad_length);

/// Inclusive range of x0 grid indices (value = index * resolution) that
/// belong to bin b: bin 0 is [0, 0.2], bin b > 0 is (0.2 b, 0.2 (b + 1)].
std::pair<long long, long long> x0_bin_indices(int bin, double resolution);

/// Per-attempt random stream seed: derive_seed(master, mu_i, nu_i, replicate).
std::uint64_t attempt_seed(std::uint64_t master_seed, std::size_t mu_index,
                           std::size_t nu_index, int replicate);

struct AttemptDraws {
  Split split;
  double x0;
  int target_length;
};

/// The three draws of one attempt in fixed order: split u, x0, length.
AttemptDraws draw_attempt(const GridSpec& grid, std::uint64_t seed,
                          int replicate);

/// Runs the generation algorithm: for each (mu, nu) on the grid and each
/// replicate, draw (split, x0 in bin replicate % 5, length), generate with
/// the divergence guard and keep results of length >= 10. Records reach
/// `sink` ordered by (mu index, nu index, replicate) whatever the thread
/// count. Returns the manifest with final counts.
CorpusManifest build_corpus(
    const GridSpec& grid, std::uint64_t master_seed,
    const std::function<void(const TrajectoryRecord&)>& sink,
    std::size_t pad_length = kDefaultPadLength, unsigned threads = 1);

struct Corpus {
  CorpusManifest manifest;
  std::vector<TrajectoryRecord> records;
};

Corpus build_corpus(const GridSpec& grid, std::uint64_t master_seed,
                    std::size_t pad_length = kDefaultPadLength,
                    unsigned threads = 1);

struct SplitQuota {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;
};

struct ClassificationCorpus {
  GridSpec delayed_grid;
  GridSpec plain_grid;
  SplitQuota quota;
  std::uint64_t master_seed = 0;
  std::size_t pad_length = kDefaultPadLength;
  // Per split (train, validation, test): sampled delayed records then
  // sampled plain records, each in source order.
  std::vector<TrajectoryRecord> records;
  SplitCounts counts;
};

/// Uniform sampling without replacement of exactly quota[split] records per
/// class and split. DataError if a class has fewer records than its quota.
ClassificationCorpus build_classification_corpora(
    const Corpus& delayed, const Corpus& plain, const SplitQuota& quota,
    std::uint64_t master_seed);

/// Delayed = 1, Plain = 0.
inline double delay_label(const TrajectoryRecord& r) {
  return r.kind == MapKind::Delayed ? 1.0 : 0.0;
}

// CSV: kind,split,mu,nu,x0,raw_length,truncated,v0,...,v{pad-1}
void write_corpus_header(std::ostream& out, std::size_t pad_length);
void write_corpus_row(std::ostream& out, const TrajectoryRecord& record);
void write_corpus_csv(std::ostream& out, std::span<const TrajectoryRecord> records,
                      std::size_t pad_length);
/// Validates header shape and every row; DataError names the line.
std::vector<TrajectoryRecord> read_corpus_csv(std::istream& in);

std::string manifest_to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(std::string_view text);
std::string classification_manifest_to_json(const ClassificationCorpus& corpus);

std::vector<TrajectoryRecord> select_split(std::span<const TrajectoryRecord> records,
                                           Split split);

}  // namespace fraclab
