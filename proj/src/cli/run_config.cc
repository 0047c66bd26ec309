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

#include "mbtdnn/cli/run_config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mbtdnn/data/csv.h"
#include "mbtdnn/error.h"

namespace mbtdnn {

namespace {

[[noreturn]] void Bad(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::kInvalidConfig, key + ": " + what + ", got '" + value + "'");
}

int ToInt(const std::string& key, const std::string& v) {
  const std::string s = Trim(v);
  int out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) Bad(key, v, "expected integer");
  return out;
}

uint64_t ToU64(const std::string& key, const std::string& v) {
  const std::string s = Trim(v);
  uint64_t out = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) {
    Bad(key, v, "expected non-negative integer");
  }
  return out;
}

double ToDouble(const std::string& key, const std::string& v) {
  const std::string s = Trim(v);
  try {
    size_t used = 0;
    const double d = std::stod(s, &used);
    if (used != s.size()) Bad(key, v, "expected number");
    return d;
  } catch (const std::logic_error&) {
    Bad(key, v, "expected number");
  }
}

bool ToBool(const std::string& key, const std::string& v) {
  const std::string s = Trim(v);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  Bad(key, v, "expected true or false");
}

std::vector<std::string> Items(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(Trim(item));
  return out;
}

std::vector<int> ToIntList(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& s : Items(v)) out.push_back(ToInt(key, s));
  return out;
}

template <size_t N, typename T, typename F>
std::array<T, N> ToArray(const std::string& key, const std::string& v, F conv) {
  const std::vector<std::string> items = Items(v);
  if (items.size() != N) Bad(key, v, ("expected " + std::to_string(N) + " values").c_str());
  std::array<T, N> out;
  for (size_t i = 0; i < N; ++i) out[i] = conv(key, items[i]);
  return out;
}

template <typename C>
std::string Join(const C& c) {
  std::ostringstream out;
  bool first = true;
  for (const auto& x : c) {
    if (!first) out << ",";
    out << x;
    first = false;
  }
  return out.str();
}

std::string Num(double d) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", d);
  return buf;
}

std::string SplitName(SplitMode m) {
  switch (m) {
    case SplitMode::kByPodcast: return "by_podcast";
    case SplitMode::kWithinPodcast: return "within_podcast";
    case SplitMode::kKFoldPodcast: return "kfold_podcast";
    case SplitMode::kKFoldClip: return "kfold_clip";
  }
  return "?";
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<std::pair<std::string, Field>>& Fields() {
  using R = RunConfig;
  using S = const std::string&;
  static const std::vector<std::pair<std::string, Field>> kFields = {
      {"mode",
       {[](R& c, S k, S v) {
          auto m = ParseTrainMode(Trim(v));
          if (!m) Bad(k, v, "expected baseline, mtl or adv");
          c.train.mode = *m;
        },
        [](const R& c) { return std::string(TrainModeName(c.train.mode)); }}},
      {"lambda", {[](R& c, S k, S v) { c.train.lambda = ToDouble(k, v); },
                  [](const R& c) { return Num(c.train.lambda); }}},
      {"lambda_schedule",
       {[](R& c, S k, S v) {
          auto s = ParseSchedule(Trim(v));
          if (!s) Bad(k, v, "expected fixed, decay10 or sigmoid_ramp");
          c.train.schedule = *s;
        },
        [](const R& c) { return std::string(ScheduleName(c.train.schedule)); }}},
      {"sigmoid_gamma", {[](R& c, S k, S v) { c.train.sigmoid_gamma = ToDouble(k, v); },
                         [](const R& c) { return Num(c.train.sigmoid_gamma); }}},
      {"sigmoid_sign",
       {[](R& c, S k, S v) {
          const std::string s = Trim(v);
          if (s == "ramp") {
            c.train.sigmoid_sign = SigmoidSign::kRamp;
          } else if (s == "as_written") {
            c.train.sigmoid_sign = SigmoidSign::kAsWritten;
          } else {
            Bad(k, v, "expected ramp or as_written");
          }
        },
        [](const R& c) {
          return std::string(c.train.sigmoid_sign == SigmoidSign::kRamp ? "ramp" : "as_written");
        }}},
      {"lr", {[](R& c, S k, S v) { c.train.lr = ToDouble(k, v); },
              [](const R& c) { return Num(c.train.lr); }}},
      {"batch_size", {[](R& c, S k, S v) { c.train.batch_size = ToInt(k, v); },
                      [](const R& c) { return std::to_string(c.train.batch_size); }}},
      {"patience", {[](R& c, S k, S v) { c.train.patience = ToInt(k, v); },
                    [](const R& c) { return std::to_string(c.train.patience); }}},
      {"min_delta", {[](R& c, S k, S v) { c.train.min_delta = ToDouble(k, v); },
                     [](const R& c) { return Num(c.train.min_delta); }}},
      {"max_epochs", {[](R& c, S k, S v) { c.train.max_epochs = ToInt(k, v); },
                      [](const R& c) { return std::to_string(c.train.max_epochs); }}},
      {"stage_boundaries",
       {[](R& c, S k, S v) { c.train.stage_boundaries = ToArray<3, int>(k, v, ToInt); },
        [](const R& c) { return Join(c.train.stage_boundaries); }}},
      {"train_encoder_with_speaker",
       {[](R& c, S k, S v) { c.train.train_encoder_with_speaker = ToBool(k, v); },
        [](const R& c) { return std::string(c.train.train_encoder_with_speaker ? "true" : "false"); }}},
      {"log_train_accuracy",
       {[](R& c, S k, S v) { c.train.log_train_accuracy = ToBool(k, v); },
        [](const R& c) { return std::string(c.train.log_train_accuracy ? "true" : "false"); }}},
      {"seed", {[](R& c, S k, S v) { c.train.seed = ToU64(k, v); },
                [](const R& c) { return std::to_string(c.train.seed); }}},
      {"input_dim", {[](R& c, S k, S v) { c.arch.input_dim = ToInt(k, v); },
                     [](const R& c) { return std::to_string(c.arch.input_dim); }}},
      {"channels", {[](R& c, S k, S v) { c.arch.channels = ToIntList(k, v); },
                    [](const R& c) { return Join(c.arch.channels); }}},
      {"head_hidden", {[](R& c, S k, S v) { c.arch.head_hidden = ToIntList(k, v); },
                       [](const R& c) { return Join(c.arch.head_hidden); }}},
      {"dropout", {[](R& c, S k, S v) { c.arch.dropout = ToDouble(k, v); },
                   [](const R& c) { return Num(c.arch.dropout); }}},
      {"bn_order",
       {[](R& c, S k, S v) {
          const std::string s = Trim(v);
          if (s == "relu_bn") {
            c.arch.bn_order = BnOrder::kReluThenBn;
          } else if (s == "bn_relu") {
            c.arch.bn_order = BnOrder::kBnThenRelu;
          } else {
            Bad(k, v, "expected relu_bn or bn_relu");
          }
        },
        [](const R& c) {
          return std::string(c.arch.bn_order == BnOrder::kReluThenBn ? "relu_bn" : "bn_relu");
        }}},
      {"n_mfcc", {[](R& c, S k, S v) { c.mfcc.n_mfcc = ToInt(k, v); },
                  [](const R& c) { return std::to_string(c.mfcc.n_mfcc); }}},
      {"window_ms", {[](R& c, S k, S v) { c.mfcc.window_ms = ToDouble(k, v); },
                     [](const R& c) { return Num(c.mfcc.window_ms); }}},
      {"hop_ms", {[](R& c, S k, S v) { c.mfcc.hop_ms = ToDouble(k, v); },
                  [](const R& c) { return Num(c.mfcc.hop_ms); }}},
      {"n_mels", {[](R& c, S k, S v) { c.mfcc.n_mels = ToInt(k, v); },
                  [](const R& c) { return std::to_string(c.mfcc.n_mels); }}},
      {"fft_size", {[](R& c, S k, S v) { c.mfcc.fft_size = ToInt(k, v); },
                    [](const R& c) { return std::to_string(c.mfcc.fft_size); }}},
      {"log_floor", {[](R& c, S k, S v) { c.mfcc.log_floor = ToDouble(k, v); },
                     [](const R& c) { return Num(c.mfcc.log_floor); }}},
      {"split",
       {[](R& c, S k, S v) {
          const std::string s = Trim(v);
          for (SplitMode m : {SplitMode::kByPodcast, SplitMode::kWithinPodcast,
                              SplitMode::kKFoldPodcast, SplitMode::kKFoldClip}) {
            if (s == SplitName(m)) {
              c.split.mode = m;
              return;
            }
          }
          Bad(k, v, "expected by_podcast, within_podcast, kfold_podcast or kfold_clip");
        },
        [](const R& c) { return SplitName(c.split.mode); }}},
      {"split_ratios",
       {[](R& c, S k, S v) { c.split.ratios = ToArray<3, double>(k, v, ToDouble); },
        [](const R& c) {
          return Num(c.split.ratios[0]) + "," + Num(c.split.ratios[1]) + "," +
                 Num(c.split.ratios[2]);
        }}},
      {"valid_fraction", {[](R& c, S k, S v) { c.split.valid_fraction = ToDouble(k, v); },
                          [](const R& c) { return Num(c.split.valid_fraction); }}},
      {"folds", {[](R& c, S k, S v) { c.split.folds = ToInt(k, v); },
                 [](const R& c) { return std::to_string(c.split.folds); }}},
      {"split_seed", {[](R& c, S k, S v) { c.split.seed = ToU64(k, v); },
                      [](const R& c) { return std::to_string(c.split.seed); }}},
      {"manifest", {[](R& c, S, S v) { c.manifest = Trim(v); },
                    [](const R& c) { return c.manifest; }}},
      {"train_manifest", {[](R& c, S, S v) { c.train_manifest = Trim(v); },
                          [](const R& c) { return c.train_manifest; }}},
      {"valid_manifest", {[](R& c, S, S v) { c.valid_manifest = Trim(v); },
                          [](const R& c) { return c.valid_manifest; }}},
      {"test_manifest", {[](R& c, S, S v) { c.test_manifest = Trim(v); },
                         [](const R& c) { return c.test_manifest; }}},
      {"synth_podcasts", {[](R& c, S k, S v) { c.synth.n_podcasts = ToInt(k, v); },
                          [](const R& c) { return std::to_string(c.synth.n_podcasts); }}},
      {"synth_class_counts",
       {[](R& c, S k, S v) { c.synth.class_counts = ToArray<kNumClasses, int>(k, v, ToInt); },
        [](const R& c) { return Join(c.synth.class_counts); }}},
      {"synth_frames", {[](R& c, S k, S v) { c.synth.frames = ToInt(k, v); },
                        [](const R& c) { return std::to_string(c.synth.frames); }}},
      {"synth_dim", {[](R& c, S k, S v) { c.synth.dim = ToInt(k, v); },
                     [](const R& c) { return std::to_string(c.synth.dim); }}},
      {"synth_class_strength",
       {[](R& c, S k, S v) { c.synth.class_strength = ToDouble(k, v); },
        [](const R& c) { return Num(c.synth.class_strength); }}},
      {"synth_podcast_strength",
       {[](R& c, S k, S v) { c.synth.podcast_strength = ToDouble(k, v); },
        [](const R& c) { return Num(c.synth.podcast_strength); }}},
      {"synth_entanglement", {[](R& c, S k, S v) { c.synth.entanglement = ToDouble(k, v); },
                              [](const R& c) { return Num(c.synth.entanglement); }}},
      {"synth_noise", {[](R& c, S k, S v) { c.synth.noise = ToDouble(k, v); },
                       [](const R& c) { return Num(c.synth.noise); }}},
      {"synth_seed", {[](R& c, S k, S v) { c.synth.seed = ToU64(k, v); },
                      [](const R& c) { return std::to_string(c.synth.seed); }}},
      {"synth_pattern_seed", {[](R& c, S k, S v) { c.synth.pattern_seed = ToU64(k, v); },
                              [](const R& c) { return std::to_string(c.synth.pattern_seed); }}},
  };
  return kFields;
}

const Field* Find(const std::string& key) {
  for (const auto& [name, f] : Fields()) {
    if (name == key) return &f;
  }
  return nullptr;
}

}  // namespace

const std::vector<std::string>& RunConfig::Keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> out;
    for (const auto& [name, f] : Fields()) out.push_back(name);
    return out;
  }();
  return kKeys;
}

void RunConfig::Set(const std::string& key, const std::string& value) {
  const Field* f = Find(key);
  if (f == nullptr) throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
  f->set(*this, key, Trim(value));
}

void RunConfig::Parse(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kInvalidConfig, where + "expected key = value");
    }
    const std::string key = Trim(line.substr(0, eq));
    if (!seen.insert(key).second) {
      throw Error(ErrorCode::kInvalidConfig, where + "duplicate key '" + key + "'");
    }
    try {
      Set(key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(e.code(), where + e.message());
    }
  }
}

void RunConfig::Load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open config " + path);
  std::ostringstream text;
  text << in.rdbuf();
  Parse(text.str(), path);
}

std::string RunConfig::ToText() const {
  std::ostringstream out;
  for (const auto& [name, f] : Fields()) out << name << " = " << f.get(*this) << "\n";
  return out.str();
}

}  // namespace mbtdnn
