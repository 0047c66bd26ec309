// Copyright 2026 The mbtdnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//       http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mbtdnn/data/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "mbtdnn/data/csv.h"
#include "mbtdnn/error.h"

namespace mbtdnn {
namespace fs = std::filesystem;
namespace {

double ParseDouble(const std::string& text, const std::string& where) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kParseError, where + ": not a number: '" + text + "'");
  }
  return v;
}

std::string FormatDouble(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string Resolve(const std::string& path, const std::string& base_dir) {
  if (path.empty() || base_dir.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base_dir) / path).lexically_normal().string();
}

}  // namespace

std::vector<ClipRecord> ParseManifest(std::istream& in, const std::string& source,
                                      const std::string& base_dir,
                                      std::vector<std::string>* warnings) {
  std::vector<ClipRecord> records;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    header = SplitCsvLine(line);
    break;
  }
  if (header.empty()) {
    if (warnings) warnings->push_back(source + ": empty manifest");
    return records;
  }
  auto column = [&](const std::string& name) -> int {
    auto it = std::find(header.begin(), header.end(), name);
    return it == header.end() ? -1 : static_cast<int>(it - header.begin());
  };
  const int c_id = column("clip_id"), c_pod = column("podcast_id"), c_label = column("label");
  if (c_id < 0 || c_pod < 0 || c_label < 0) {
    throw Error(ErrorCode::kParseError,
                source + ":" + std::to_string(line_no) +
                    ": header must contain clip_id, podcast_id and label");
  }
  const int c_audio = column("audio_path"), c_start = column("start_ms"),
            c_stop = column("stop_ms"), c_feat = column("feature_path");

  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() != header.size()) {
      throw Error(ErrorCode::kParseError, where + ": expected " + std::to_string(header.size()) +
                                              " fields, got " + std::to_string(f.size()));
    }
    ClipRecord r;
    r.clip_id = f[c_id];
    r.podcast_id = f[c_pod];
    if (r.clip_id.empty() || r.podcast_id.empty()) {
      throw Error(ErrorCode::kParseError, where + ": empty clip_id or podcast_id");
    }
    if (!seen.insert(r.clip_id).second) {
      throw Error(ErrorCode::kParseError, where + ": duplicate clip_id " + r.clip_id);
    }
    auto label = ParseClass(f[c_label]);
    if (!label) {
      throw Error(ErrorCode::kUnknownLabel, where + ": unknown label '" + f[c_label] + "'");
    }
    r.label = *label;
    if (c_audio >= 0) r.audio_path = Resolve(f[c_audio], base_dir);
    if (c_start >= 0 && !f[c_start].empty()) r.start_ms = ParseDouble(f[c_start], where);
    if (c_stop >= 0 && !f[c_stop].empty()) r.stop_ms = ParseDouble(f[c_stop], where);
    if (c_feat >= 0) r.feature_path = Resolve(f[c_feat], base_dir);
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<ClipRecord> LoadManifest(const std::string& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open manifest " + path);
  return ParseManifest(in, path, fs::path(path).parent_path().string(), warnings);
}

void WriteManifest(const std::string& path, const std::vector<ClipRecord>& records) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "clip_id,podcast_id,label,audio_path,start_ms,stop_ms,feature_path\n";
  for (const ClipRecord& r : records) {
    out << CsvEscape(r.clip_id) << ',' << CsvEscape(r.podcast_id) << ',' << ClassName(r.label)
        << ',' << CsvEscape(r.audio_path) << ','
        << (r.start_ms >= 0 ? FormatDouble(r.start_ms) : "") << ','
        << (r.stop_ms >= 0 ? FormatDouble(r.stop_ms) : "") << ',' << CsvEscape(r.feature_path)
        << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path);
}

std::vector<std::string> DistinctPodcasts(std::span<const ClipRecord> records) {
  std::set<std::string> ids;
  for (const auto& r : records) ids.insert(r.podcast_id);
  return {ids.begin(), ids.end()};
}

// ---------------------------------------------------------------------------

Sep28kResult AdaptSep28k(std::istream& table, const Sep28kOptions& opts) {
  Sep28kResult result;
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(table, line)) {
    ++line_no;
    if (!Trim(line).empty()) {
      header = SplitCsvLine(line);
      break;
    }
  }
  if (header.empty()) return result;
  auto column = [&](const char* name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::kMalformedRow, std::string("label table lacks column ") + name);
    }
    return static_cast<size_t>(it - header.begin());
  };
  const size_t c_show = column("Show"), c_ep = column("EpId"), c_clip = column("ClipId");
  const size_t c_fluent = column("NoStutteredWords"), c_sound = column("SoundRep"),
               c_word = column("WordRep"), c_prolong = column("Prolongation"),
               c_block = column("Block"), c_inter = column("Interjection");
  const std::vector<std::pair<const char*, size_t>> flags = {
      {"Unsure", column("Unsure")},
      {"PoorAudioQuality", column("PoorAudioQuality")},
      {"DifficultToUnderstand", column("DifficultToUnderstand")},
      {"NaturalPause", column("NaturalPause")},
      {"Music", column("Music")},
      {"NoSpeech", column("NoSpeech")}};

  while (std::getline(table, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    std::vector<std::string> f = SplitCsvLine(line);
    if (f.size() < header.size()) {
      throw Error(ErrorCode::kMalformedRow, where + ": expected " +
                                                std::to_string(header.size()) + " fields");
    }
    auto count = [&](size_t c) {
      try {
        return static_cast<int>(ParseDouble(f[c], where));
      } catch (const Error&) {
        throw Error(ErrorCode::kMalformedRow, where + ": bad count in column " + header[c]);
      }
    };
    const std::string show = f[c_show], ep = f[c_ep], clip = f[c_clip];
    const std::string clip_id = show + "_" + ep + "_" + clip;

    std::string flagged;
    for (const auto& [name, c] : flags) {
      if (count(c) >= opts.flag_threshold) {
        flagged = name;
        break;
      }
    }
    if (!flagged.empty()) {
      result.excluded.push_back({clip_id, "non-stuttering flag " + flagged});
      continue;
    }
    const std::array<int, kNumClasses> votes = {count(c_fluent),
                                                std::max(count(c_sound), count(c_word)),
                                                count(c_prolong), count(c_block), count(c_inter)};
    const int best = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    if (votes[best] <= 0) {
      result.excluded.push_back({clip_id, "no stuttering annotation"});
      continue;
    }
    if (std::count(votes.begin(), votes.end(), votes[best]) > 1) {
      result.excluded.push_back({clip_id, "tie between classes"});
      continue;
    }
    ClipRecord r;
    r.clip_id = clip_id;
    r.podcast_id = show + "_" + ep;
    r.label = static_cast<StutterClass>(best);
    r.audio_path = (fs::path(opts.audio_root) / show / ep / (clip_id + ".wav")).string();
    result.class_counts[best]++;
    result.records.push_back(std::move(r));
  }
  return result;
}

void WriteExclusionReport(const std::string& path, const std::vector<Exclusion>& excluded) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out << "clip_id,reason\n";
  for (const auto& e : excluded) out << CsvEscape(e.clip_id) << ',' << CsvEscape(e.reason) << '\n';
}

// ---------------------------------------------------------------------------

const char* SplitModeName(SplitMode m) {
  switch (m) {
    case SplitMode::kByPodcast: return "by_podcast";
    case SplitMode::kWithinPodcast: return "within_podcast";
    case SplitMode::kKFoldPodcast: return "kfold_podcast";
    case SplitMode::kKFoldClip: return "kfold_clip";
  }
  return "?";
}

std::vector<int> LargestRemainder(int total, std::span<const double> ratios) {
  const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  if (ratios.empty() || !(sum > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "split ratios must be positive");
  }
  std::vector<int> sizes(ratios.size());
  std::vector<double> frac(ratios.size());
  int assigned = 0;
  for (size_t i = 0; i < ratios.size(); ++i) {
    if (ratios[i] < 0.0) throw Error(ErrorCode::kInvalidConfig, "negative split ratio");
    const double exact = total * ratios[i] / sum;
    // Guard against 0.1 * 10 = 0.9999999 style representation error.
    const double fl = std::floor(exact + 1e-9);
    sizes[i] = static_cast<int>(fl);
    frac[i] = exact - fl;
    assigned += sizes[i];
  }
  std::vector<size_t> order(ratios.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return frac[a] > frac[b] + 1e-12; });
  for (size_t i = 0; assigned < total; ++i, ++assigned) sizes[order[i % order.size()]]++;
  return sizes;
}

DatasetSplit SplitByPodcast(std::span<const ClipRecord> records,
                            const std::array<double, 3>& ratios, uint64_t seed) {
  std::vector<std::string> podcasts = DistinctPodcasts(records);
  if (podcasts.size() < 3) {
    throw Error(ErrorCode::kTooFewPodcasts,
                "need at least 3 podcasts, got " + std::to_string(podcasts.size()));
  }
  std::mt19937_64 rng(seed);
  std::shuffle(podcasts.begin(), podcasts.end(), rng);
  const std::vector<int> sizes = LargestRemainder(static_cast<int>(podcasts.size()), ratios);
  std::map<std::string, int> which;
  for (size_t i = 0, set = 0, filled = 0; i < podcasts.size(); ++i) {
    while (filled == static_cast<size_t>(sizes[set])) {
      ++set;
      filled = 0;
    }
    which[podcasts[i]] = static_cast<int>(set);
    ++filled;
  }
  DatasetSplit split;
  split.mode = SplitMode::kByPodcast;
  for (const ClipRecord& r : records) {
    switch (which[r.podcast_id]) {
      case 0: split.train.push_back(r); break;
      case 1: split.valid.push_back(r); break;
      default: split.test.push_back(r); break;
    }
  }
  return split;
}

DatasetSplit SplitWithinPodcast(std::span<const ClipRecord> records, double valid_fraction,
                                uint64_t seed, std::vector<ClipRecord> test) {
  if (!(valid_fraction > 0.0 && valid_fraction < 1.0)) {
    throw Error(ErrorCode::kInvalidConfig, "valid fraction must be in (0, 1)");
  }
  std::map<std::string, int> per_podcast;
  std::map<std::pair<std::string, int>, std::vector<size_t>> cells;
  for (size_t i = 0; i < records.size(); ++i) {
    per_podcast[records[i].podcast_id]++;
    cells[{records[i].podcast_id, ClassIndex(records[i].label)}].push_back(i);
  }
  for (const auto& [pod, n] : per_podcast) {
    if (n < 2) {
      throw Error(ErrorCode::kEmptyPodcast,
                  "podcast " + pod + " has " + std::to_string(n) + " clip(s); need at least 2");
    }
  }
  DatasetSplit split;
  split.mode = SplitMode::kWithinPodcast;
  split.test = std::move(test);
  std::mt19937_64 rng(seed);
  const std::array<double, 2> ratios = {1.0 - valid_fraction, valid_fraction};
  for (auto& [key, idx] : cells) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const int n = static_cast<int>(idx.size());
    if (n == 1) {
      split.train.push_back(records[idx[0]]);
      split.warnings.push_back("podcast " + key.first + " has a single " +
                               ClassName(static_cast<StutterClass>(key.second)) +
                               " clip; kept in train only");
      continue;
    }
    int n_valid = LargestRemainder(n, ratios)[1];
    n_valid = std::clamp(n_valid, 1, n - 1);
    for (int i = 0; i < n; ++i) {
      (i < n_valid ? split.valid : split.train).push_back(records[idx[i]]);
    }
  }
  return split;
}

std::vector<DatasetSplit> KFold(std::span<const ClipRecord> records, int k, uint64_t seed,
                                bool by_podcast) {
  if (k < 2) throw Error(ErrorCode::kInvalidConfig, "k-fold needs k >= 2");
  std::mt19937_64 rng(seed);
  std::vector<int> fold_of(records.size());
  if (by_podcast) {
    std::vector<std::string> podcasts = DistinctPodcasts(records);
    if (static_cast<int>(podcasts.size()) < k) {
      throw Error(ErrorCode::kTooFewPodcasts, std::to_string(podcasts.size()) +
                                                  " podcasts cannot fill " + std::to_string(k) +
                                                  " folds");
    }
    std::shuffle(podcasts.begin(), podcasts.end(), rng);
    std::map<std::string, int> fold;
    for (size_t i = 0; i < podcasts.size(); ++i) fold[podcasts[i]] = static_cast<int>(i % k);
    for (size_t i = 0; i < records.size(); ++i) fold_of[i] = fold[records[i].podcast_id];
  } else {
    if (static_cast<int>(records.size()) < k) {
      throw Error(ErrorCode::kInvalidConfig, "fewer clips than folds");
    }
    std::vector<size_t> order(records.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    for (size_t i = 0; i < order.size(); ++i) fold_of[order[i]] = static_cast<int>(i % k);
  }
  std::vector<DatasetSplit> folds(k);
  for (int f = 0; f < k; ++f) {
    folds[f].mode = by_podcast ? SplitMode::kKFoldPodcast : SplitMode::kKFoldClip;
    for (size_t i = 0; i < records.size(); ++i) {
      (fold_of[i] == f ? folds[f].valid : folds[f].train).push_back(records[i]);
    }
  }
  return folds;
}

// ---------------------------------------------------------------------------

void SyntheticConfig::Validate() const {
  auto fail = [](const std::string& w) { throw Error(ErrorCode::kInvalidConfig, w); };
  if (n_podcasts < 1) fail("n_podcasts must be >= 1");
  for (int c : class_counts) {
    if (c < 1) fail("every class count must be >= 1");
  }
  if (frames < 1 || dim < 1) fail("frames and dim must be positive");
  if (dim < kNumClasses + 1) fail("dim must leave room for podcast patterns outside the class span");
  if (!(entanglement >= 0.0 && entanglement <= 1.0)) fail("entanglement must be in [0, 1]");
  if (!(noise >= 0.0)) fail("noise must be >= 0");
}

SyntheticPatterns MakeSyntheticPatterns(const SyntheticConfig& cfg) {
  cfg.Validate();
  std::mt19937_64 rng(cfg.pattern_seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto random_vector = [&](int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = gauss(rng);
    return v;
  };
  // Orthonormal class directions in coefficient space.
  Eigen::MatrixXd basis(cfg.dim, kNumClasses);
  for (int c = 0; c < kNumClasses; ++c) {
    Eigen::VectorXd v = random_vector(cfg.dim);
    for (int j = 0; j < c; ++j) v -= basis.col(j).dot(v) * basis.col(j);
    basis.col(c) = v.normalized();
  }
  // Spreading a unit direction evenly over the frames keeps the pattern at
  // unit Frobenius norm and preserves orthogonality between directions.
  const double per_frame = 1.0 / std::sqrt(static_cast<double>(cfg.frames));
  auto spread = [&](const Eigen::VectorXd& dir) {
    Eigen::MatrixXf m = (dir * per_frame).cast<float>().replicate(1, cfg.frames);
    return m;
  };
  SyntheticPatterns p;
  for (int c = 0; c < kNumClasses; ++c) p.classes.push_back(spread(basis.col(c)));
  for (int s = 0; s < cfg.n_podcasts; ++s) {
    Eigen::VectorXd v = random_vector(cfg.dim);
    // Two Gram-Schmidt passes for numerical orthogonality.
    for (int pass = 0; pass < 2; ++pass) {
      for (int c = 0; c < kNumClasses; ++c) v -= basis.col(c).dot(v) * basis.col(c);
    }
    p.podcast_orthogonal.push_back(spread(v.normalized()));
    const Eigen::VectorXd w = basis * random_vector(kNumClasses);
    p.podcast_parallel.push_back(spread(w.normalized()));
  }
  return p;
}

std::vector<ClipRecord> GenerateSynthetic(const SyntheticConfig& cfg) {
  const SyntheticPatterns pat = MakeSyntheticPatterns(cfg);
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<float> gauss(0.0f, 1.0f);
  const auto alpha = static_cast<float>(cfg.class_strength);
  const auto beta = static_cast<float>(cfg.podcast_strength);
  const auto rho = static_cast<float>(cfg.entanglement);
  const auto sigma = static_cast<float>(cfg.noise);
  auto podcast_name = [](int s) {
    std::ostringstream os;
    os << "pod" << (s < 10 ? "0" : "") << s;
    return os.str();
  };
  std::vector<ClipRecord> out;
  for (StutterClass c : kAllClasses) {
    const int ci = ClassIndex(c);
    for (int j = 0; j < cfg.class_counts[ci]; ++j) {
      const int s = j % cfg.n_podcasts;
      auto m = std::make_shared<FeatureMatrix>();
      m->coeffs = alpha * pat.classes[ci] +
                  beta * ((1.0f - rho) * pat.podcast_orthogonal[s] + rho * pat.podcast_parallel[s]);
      for (Eigen::Index k = 0; k < m->coeffs.size(); ++k) m->coeffs.data()[k] += sigma * gauss(rng);
      ClipRecord r;
      r.podcast_id = podcast_name(s);
      r.clip_id = "syn_" + r.podcast_id + "_" + ClassLetter(c) + "_" + std::to_string(j);
      r.label = c;
      r.features = std::move(m);
      out.push_back(std::move(r));
    }
  }
  return out;
}

void WriteFeatureDataset(const std::string& dir, std::vector<ClipRecord> records) {
  const fs::path root(dir);
  fs::create_directories(root / "features");
  for (ClipRecord& r : records) {
    if (!r.features) continue;
    const std::string rel = "features/" + r.clip_id + ".fmat";
    WriteFeatureMatrix((root / rel).string(), *r.features);
    r.feature_path = rel;
  }
  WriteManifest((root / "manifest.csv").string(), records);
}

}  // namespace mbtdnn
