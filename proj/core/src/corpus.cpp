#include "fraclab/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>

#include <fmt/format.h>

#include "fraclab/errors.hpp"
#include "fraclab/format.hpp"
#include "fraclab/grid.hpp"
#include "fraclab/parallel.hpp"
#include "fraclab/rng.hpp"
#include "json.hpp"

namespace fraclab {

using nlohmann::json;

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Validation:
      return "validation";
    case Split::Test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "validation") return Split::Validation;
  if (text == "test") return Split::Test;
  throw DataError("unknown split '" + std::string(text) + "'");
}

void SplitCounts::add(Split s) { ++(*this)[s]; }

std::size_t& SplitCounts::operator[](Split s) {
  return s == Split::Train ? train : s == Split::Validation ? validation : test;
}

std::size_t SplitCounts::operator[](Split s) const {
  return s == Split::Train ? train : s == Split::Validation ? validation : test;
}

std::size_t GridSpec::mu_count() const { return grid_count(mu_lo, mu_hi, mu_step); }
std::size_t GridSpec::nu_count() const { return grid_count(nu_lo, nu_hi, nu_step); }
double GridSpec::mu_at(std::size_t i) const { return grid_value(mu_lo, mu_hi, mu_step, i); }
double GridSpec::nu_at(std::size_t i) const { return grid_value(nu_lo, nu_hi, nu_step, i); }

void GridSpec::validate(std::size_t pad_length) const {
  if (!(mu_step > 0.0) || !(nu_step > 0.0)) {
    throw DomainError("grid steps must be positive");
  }
  if (!(mu_lo <= mu_hi) || !(nu_lo <= nu_hi)) {
    throw DomainError("grid bounds are inverted");
  }
  if (!(nu_lo > 0.0) || nu_hi > 1.0) {
    throw DomainError("grid nu range must lie in (0, 1]");
  }
  if (!std::isfinite(mu_lo) || !std::isfinite(mu_hi)) {
    throw DomainError("grid mu range must be finite");
  }
  if (replicates_per_pair < 1) {
    throw DomainError("replicates_per_pair must be at least 1");
  }
  if (len_lo < kMinRawLength || len_hi < len_lo) {
    throw DomainError("trajectory lengths must satisfy 10 <= len_lo <= len_hi");
  }
  if (static_cast<std::size_t>(len_hi) > pad_length) {
    throw DomainError(fmt::format("len_hi {} exceeds pad length {}", len_hi,
                                  pad_length));
  }
  const double points = 1.0 / x0_resolution;
  const auto rounded = std::llround(points);
  if (!(x0_resolution > 0.0) || std::abs(points - rounded) > 1e-9 ||
      rounded % kX0Bins != 0) {
    throw DomainError("x0_resolution must divide 1 into a multiple of 5 steps");
  }
}

GridSpec preset_grid(std::string_view name) {
  GridSpec g;
  if (name == "paper-delayed") return g;
  if (name == "paper-plain") {
    g.kind = MapKind::Plain;
    g.mu_lo = 2.0;
    g.mu_hi = 3.2;
    return g;
  }
  if (name == "desk") {
    g.mu_step = 0.02;
    g.nu_step = 0.05;
    return g;
  }
  if (name == "desk-plain") {
    g.kind = MapKind::Plain;
    g.mu_lo = 2.0;
    g.mu_hi = 3.2;
    g.mu_step = 0.01;
    g.nu_step = 0.05;
    return g;
  }
  throw DomainError("unknown preset '" + std::string(name) + "'");
}

std::vector<std::string> preset_names() {
  return {"paper-delayed", "paper-plain", "desk", "desk-plain"};
}

std::vector<double> pad_left(std::span<const double> values,
                             std::size_t pad_length) {
  if (values.size() > pad_length) {
    throw RangeError(fmt::format("cannot pad {} values to length {}",
                                 values.size(), pad_length));
  }
  std::vector<double> out(pad_length, 0.0);
  std::copy(values.begin(), values.end(),
            out.end() - static_cast<std::ptrdiff_t>(values.size()));
  return out;
}

std::pair<long long, long long> x0_bin_indices(int bin, double resolution) {
  const long long per_bin = std::llround(1.0 / resolution) / kX0Bins;
  const long long hi = per_bin * (bin + 1);
  const long long lo = bin == 0 ? 0 : per_bin * bin + 1;
  return {lo, hi};
}

std::uint64_t attempt_seed(std::uint64_t master_seed, std::size_t mu_index,
                           std::size_t nu_index, int replicate) {
  return derive_seed(master_seed, mu_index, nu_index,
                     static_cast<std::uint64_t>(replicate));
}

AttemptDraws draw_attempt(const GridSpec& grid, std::uint64_t seed,
                          int replicate) {
  SplitMix64 rng(seed);
  const Split split = split_for(rng.uniform());
  const auto [lo, hi] = x0_bin_indices(replicate % kX0Bins, grid.x0_resolution);
  const double points = static_cast<double>(std::llround(1.0 / grid.x0_resolution));
  const double x0 = static_cast<double>(rng.between(lo, hi)) / points;
  const int length = static_cast<int>(rng.between(grid.len_lo, grid.len_hi));
  return {split, x0, length};
}

namespace {

// mu rows generated per parallel batch before ordered emission.
constexpr std::size_t kMuRowsPerBatch = 8;

}  // namespace

CorpusManifest build_corpus(
    const GridSpec& grid, std::uint64_t master_seed,
    const std::function<void(const TrajectoryRecord&)>& sink,
    std::size_t pad_length, unsigned threads) {
  grid.validate(pad_length);
  CorpusManifest manifest{grid, master_seed, pad_length, {},
                          std::string(kCorpusFormatVersion)};

  const std::size_t n_mu = grid.mu_count();
  const std::size_t n_nu = grid.nu_count();
  const auto reps = static_cast<std::size_t>(grid.replicates_per_pair);

  std::vector<KernelTable> kernels;
  kernels.reserve(n_nu);
  for (std::size_t j = 0; j < n_nu; ++j) {
    kernels.push_back(build_kernel(grid.nu_at(j), grid.len_hi - 1));
  }

  std::vector<std::optional<TrajectoryRecord>> slots;
  for (std::size_t mu_begin = 0; mu_begin < n_mu; mu_begin += kMuRowsPerBatch) {
    const std::size_t mu_end = std::min(n_mu, mu_begin + kMuRowsPerBatch);
    const std::size_t tasks = (mu_end - mu_begin) * n_nu * reps;
    slots.assign(tasks, std::nullopt);
    parallel_for(tasks, threads, [&](std::size_t t) {
      const std::size_t mu_i = mu_begin + t / (n_nu * reps);
      const std::size_t nu_i = (t / reps) % n_nu;
      const int rep = static_cast<int>(t % reps);
      const auto draws =
          draw_attempt(grid, attempt_seed(master_seed, mu_i, nu_i, rep), rep);
      const MapSpec spec{grid.kind, grid.mu_at(mu_i), grid.nu_at(nu_i),
                         draws.x0, draws.x0};
      Trajectory traj = generate(spec, draws.target_length, kernels[nu_i]);
      if (traj.values.size() < static_cast<std::size_t>(kMinRawLength)) return;
      slots[t] = TrajectoryRecord{grid.kind,
                                  spec.mu,
                                  spec.nu,
                                  spec.x0,
                                  static_cast<int>(traj.values.size()),
                                  draws.split,
                                  traj.truncated,
                                  pad_left(traj.values, pad_length)};
    });
    for (const auto& slot : slots) {
      if (!slot) continue;
      manifest.counts.add(slot->split);
      sink(*slot);
    }
  }
  return manifest;
}

Corpus build_corpus(const GridSpec& grid, std::uint64_t master_seed,
                    std::size_t pad_length, unsigned threads) {
  Corpus corpus;
  corpus.manifest = build_corpus(
      grid, master_seed,
      [&](const TrajectoryRecord& r) { corpus.records.push_back(r); },
      pad_length, threads);
  return corpus;
}

ClassificationCorpus build_classification_corpora(const Corpus& delayed,
                                                  const Corpus& plain,
                                                  const SplitQuota& quota,
                                                  std::uint64_t master_seed) {
  if (delayed.manifest.pad_length != plain.manifest.pad_length) {
    throw DataError("classification corpora must share a pad length");
  }
  ClassificationCorpus out{delayed.manifest.grid, plain.manifest.grid, quota,
                           master_seed, delayed.manifest.pad_length, {}, {}};
  const Split splits[] = {Split::Train, Split::Validation, Split::Test};
  const std::size_t quotas[] = {quota.train, quota.validation, quota.test};
  const Corpus* classes[] = {&delayed, &plain};

  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t c = 0; c < 2; ++c) {
      const auto& records = classes[c]->records;
      const MapKind expected = c == 0 ? MapKind::Delayed : MapKind::Plain;
      std::vector<std::size_t> pool;
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (records[i].split != splits[s]) continue;
        if (records[i].kind != expected) {
          throw DataError("classification input mixes model kinds");
        }
        pool.push_back(i);
      }
      if (pool.size() < quotas[s]) {
        throw DataError(fmt::format(
            "{} {} split has {} records, quota is {}", to_string(expected),
            to_string(splits[s]), pool.size(), quotas[s]));
      }
      // Partial Fisher-Yates: the first quota slots become a uniform sample.
      SplitMix64 rng(derive_seed(master_seed, c, s));
      for (std::size_t i = 0; i < quotas[s]; ++i) {
        const std::size_t j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
      }
      pool.resize(quotas[s]);
      std::sort(pool.begin(), pool.end());
      for (std::size_t i : pool) {
        out.records.push_back(records[i]);
        out.counts.add(splits[s]);
      }
    }
  }
  return out;
}

void write_corpus_header(std::ostream& out, std::size_t pad_length) {
  out << "kind,split,mu,nu,x0,raw_length,truncated";
  for (std::size_t i = 0; i < pad_length; ++i) out << ",v" << i;
  out << '\n';
}

void write_corpus_row(std::ostream& out, const TrajectoryRecord& r) {
  std::string line;
  line.reserve(32 + 24 * r.padded.size());
  line += to_string(r.kind);
  line += ',';
  line += to_string(r.split);
  for (double v : {r.mu, r.nu, r.x0}) {
    line += ',';
    line += format_real(v);
  }
  line += fmt::format(",{},{}", r.raw_length, r.truncated ? 1 : 0);
  for (double v : r.padded) {
    line += ',';
    line += format_real(v);
  }
  line += '\n';
  out << line;
}

void write_corpus_csv(std::ostream& out, std::span<const TrajectoryRecord> records,
                      std::size_t pad_length) {
  write_corpus_header(out, pad_length);
  for (const auto& r : records) {
    if (r.padded.size() != pad_length) {
      throw DataError("record padded length differs from corpus pad length");
    }
    write_corpus_row(out, r);
  }
}

std::vector<TrajectoryRecord> read_corpus_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("corpus file is empty");
  const auto header = split_csv_line(line);
  constexpr std::size_t kFixed = 7;
  if (header.size() <= kFixed || header[0] != "kind" || header[1] != "split" ||
      header[2] != "mu" || header[3] != "nu" || header[4] != "x0" ||
      header[5] != "raw_length" || header[6] != "truncated") {
    throw DataError("corpus header is not kind,split,mu,nu,x0,raw_length,truncated,v0,...");
  }
  const std::size_t pad_length = header.size() - kFixed;
  for (std::size_t i = 0; i < pad_length; ++i) {
    if (header[kFixed + i] != "v" + std::to_string(i)) {
      throw DataError("corpus header value columns must be v0..v{pad-1}");
    }
  }

  std::vector<TrajectoryRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw DataError(fmt::format("corpus line {}: expected {} fields, got {}",
                                  line_no, header.size(), f.size()));
    }
    try {
      TrajectoryRecord r;
      r.kind = parse_map_kind(f[0]);
      r.split = parse_split(f[1]);
      r.mu = parse_real(f[2], "mu");
      r.nu = parse_real(f[3], "nu");
      r.x0 = parse_real(f[4], "x0");
      r.raw_length = static_cast<int>(parse_integer(f[5], "raw_length"));
      r.truncated = parse_integer(f[6], "truncated") != 0;
      if (r.raw_length < 0 || static_cast<std::size_t>(r.raw_length) > pad_length) {
        throw DataError("raw_length outside [0, pad length]");
      }
      r.padded.reserve(pad_length);
      for (std::size_t i = 0; i < pad_length; ++i) {
        r.padded.push_back(parse_real(f[kFixed + i], "trajectory value"));
      }
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw DataError(fmt::format("corpus line {}: {}", line_no, e.what()));
    }
  }
  return records;
}

namespace {

json grid_to_json(const GridSpec& g) {
  return json{{"kind", to_string(g.kind)},
              {"mu_lo", g.mu_lo},
              {"mu_hi", g.mu_hi},
              {"mu_step", g.mu_step},
              {"nu_lo", g.nu_lo},
              {"nu_hi", g.nu_hi},
              {"nu_step", g.nu_step},
              {"replicates_per_pair", g.replicates_per_pair},
              {"len_lo", g.len_lo},
              {"len_hi", g.len_hi},
              {"x0_resolution", g.x0_resolution}};
}

GridSpec grid_from_json(const json& j) {
  GridSpec g;
  g.kind = parse_map_kind(j.at("kind").get<std::string>());
  g.mu_lo = j.at("mu_lo").get<double>();
  g.mu_hi = j.at("mu_hi").get<double>();
  g.mu_step = j.at("mu_step").get<double>();
  g.nu_lo = j.at("nu_lo").get<double>();
  g.nu_hi = j.at("nu_hi").get<double>();
  g.nu_step = j.at("nu_step").get<double>();
  g.replicates_per_pair = j.at("replicates_per_pair").get<int>();
  g.len_lo = j.at("len_lo").get<int>();
  g.len_hi = j.at("len_hi").get<int>();
  g.x0_resolution = j.at("x0_resolution").get<double>();
  return g;
}

json counts_to_json(const SplitCounts& c) {
  return json{{"train", c.train}, {"validation", c.validation}, {"test", c.test}};
}

}  // namespace

std::string manifest_to_json(const CorpusManifest& m) {
  json j{{"format_version", m.format_version},
         {"grid", grid_to_json(m.grid)},
         {"master_seed", m.master_seed},
         {"pad_length", m.pad_length},
         {"counts", counts_to_json(m.counts)}};
  return j.dump(2) + "\n";
}

CorpusManifest manifest_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    CorpusManifest m;
    m.format_version = j.at("format_version").get<std::string>();
    if (m.format_version != kCorpusFormatVersion) {
      throw DataError("unsupported corpus format '" + m.format_version + "'");
    }
    m.grid = grid_from_json(j.at("grid"));
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.pad_length = j.at("pad_length").get<std::size_t>();
    const auto& c = j.at("counts");
    m.counts.train = c.at("train").get<std::size_t>();
    m.counts.validation = c.at("validation").get<std::size_t>();
    m.counts.test = c.at("test").get<std::size_t>();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed corpus manifest: ") + e.what());
  }
}

std::string classification_manifest_to_json(const ClassificationCorpus& c) {
  json j{{"format_version", kCorpusFormatVersion},
         {"task", "delay-classification"},
         {"grid", grid_to_json(c.delayed_grid)},
         {"plain_grid", grid_to_json(c.plain_grid)},
         {"quota_per_class",
          {{"train", c.quota.train},
           {"validation", c.quota.validation},
           {"test", c.quota.test}}},
         {"master_seed", c.master_seed},
         {"pad_length", c.pad_length},
         {"counts", counts_to_json(c.counts)}};
  return j.dump(2) + "\n";
}

std::vector<TrajectoryRecord> select_split(std::span<const TrajectoryRecord> records,
                                           Split split) {
  std::vector<TrajectoryRecord> out;
  for (const auto& r : records) {
    if (r.split == split) out.push_back(r);
  }
  return out;
}

}  // namespace fraclab
