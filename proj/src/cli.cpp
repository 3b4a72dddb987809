// SPDX-FileCopyrightText: 2026 stnormal contributors
// SPDX-License-Identifier: Apache-2.0
#include "stnormal/cli.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <variant>
#include <vector>

#include <CLI11.hpp>

#include "stnormal/cloud_io.hpp"
#include "stnormal/detector.hpp"
#include "stnormal/error.hpp"
#include "stnormal/evaluation.hpp"
#include "stnormal/key_value.hpp"
#include "stnormal/params.hpp"
#include "stnormal/registration.hpp"
#include "stnormal/scoring.hpp"
#include "stnormal/synthetic.hpp"

namespace stnormal::cli {

namespace fs = std::filesystem;

namespace {

// ------------------------------------------------------------------ settings

struct Settings {
  Params params;
  fs::path input, output, poses, labels, scene;
  std::optional<CloudFormat> format;
  double rate = 10.0;
  bool rate_given = false;
  double upsample_radius = 0.5;
  std::optional<double> range_limit;
  std::optional<std::uint64_t> seed;
  std::size_t repetitions = 5;
  bool follow = false;
  double follow_idle = 5.0;
  bool assign_frame_time = false;
  Interpolation interpolation = Interpolation::kLinear;
  IndexStrategy strategy = IndexStrategy::kPerCloud;
  std::size_t threads = 0;

  double period() const { return 1.0 / rate; }
};

struct KeySpec {
  const char* key;
  const char* help;
  bool is_flag = false;
};

const KeySpec kKeys[] = {
    {"N", "half window: the sliding map holds 2N+1 clouds"},
    {"radius", "neighborhood radius d_r in meters"},
    {"thr", "score threshold; dynamic iff score > thr"},
    {"voxel", "fixed voxel size in meters (exclusive with --auto-voxel-divisor)"},
    {"auto_voxel_divisor", "voxel size = bounding-box diagonal / divisor"},
    {"min_neighbors", "minimum neighbors for a valid score"},
    {"min_distinct_frames", "minimum distinct source frames among the neighbors"},
    {"time_scale", "experimental multiplier applied to t before scoring"},
    {"index", "map index strategy: per_cloud or rebuild"},
    {"threads", "scoring threads (0 = hardware concurrency)"},
    {"rate", "sensor frame rate in Hz"},
    {"input", "frame directory, single cloud file or manifest"},
    {"output", "output directory"},
    {"poses", "trajectory file (stamp tx ty tz qx qy qz qw)"},
    {"interpolation", "pose interpolation: linear or nearest"},
    {"format", "output cloud format: csv or ply"},
    {"assign_frame_time", "give every point its frame stamp", true},
    {"labels", "ground-truth label file (frame,point_index,label)"},
    {"upsample_radius", "label transfer radius for evaluation in meters"},
    {"range_limit", "evaluate only points within this range of the sensor"},
    {"scene", "synthetic scene description"},
    {"seed", "override the scene seed"},
    {"repetitions", "benchmark repetitions per frame"},
    {"follow", "keep watching the input directory for new frames", true},
    {"follow_idle", "seconds without new frames before --follow stops"},
};

std::string flag_name(std::string_view key) {
  std::string name = "--" + std::string(key);
  std::replace(name.begin(), name.end(), '_', '-');
  return name;
}

bool is_known_key(std::string_view key) {
  return std::any_of(std::begin(kKeys), std::end(kKeys),
                     [&](const KeySpec& k) { return key == k.key; });
}

CloudFormat parse_format(const std::string& text) {
  if (text == "csv") return CloudFormat::kCsv;
  if (text == "ply") return CloudFormat::kPly;
  throw ConfigError("format: expected csv or ply, got '" + text + "'");
}

std::size_t get_count(const KeyValueFile& kv, std::string_view key) {
  const long long v = *kv.get_int(key);
  if (v < 0) throw ConfigError(std::string(key) + ": must not be negative");
  return static_cast<std::size_t>(v);
}

Settings resolve_settings(const KeyValueFile& kv) {
  for (const auto& [key, value] : kv.entries()) {
    if (!is_known_key(key)) throw ConfigError(kv.source() + ": unknown key '" + key + "'");
  }
  Settings s;
  Params& p = s.params;
  if (kv.has("voxel") && kv.has("auto_voxel_divisor")) {
    throw ConfigError("set exactly one of voxel and auto_voxel_divisor");
  }
  if (const auto v = kv.get_double("voxel")) {
    if (!(*v > 0.0)) throw ConfigError("voxel: must be positive");
    p.voxel = VoxelSetting::fixed(*v);
  } else if (const auto d = kv.get_double("auto_voxel_divisor")) {
    if (!(*d > 0.0)) throw ConfigError("auto_voxel_divisor: must be positive");
    p.voxel = VoxelSetting::auto_divisor(*d);
  }
  if (kv.has("N")) p.half_window = get_count(kv, "N");
  if (const auto v = kv.get_double("radius")) p.radius = *v;
  if (const auto v = kv.get_double("thr")) p.threshold = *v;
  if (kv.has("min_neighbors")) p.min_neighbors = get_count(kv, "min_neighbors");
  if (kv.has("min_distinct_frames")) p.min_distinct_frames = get_count(kv, "min_distinct_frames");
  if (const auto v = kv.get_double("time_scale")) p.time_scale = *v;
  p.validate();

  if (const auto v = kv.get_string("index")) {
    if (*v == "per_cloud") {
      s.strategy = IndexStrategy::kPerCloud;
    } else if (*v == "rebuild") {
      s.strategy = IndexStrategy::kRebuild;
    } else {
      throw ConfigError("index: expected per_cloud or rebuild, got '" + *v + "'");
    }
  }
  if (kv.has("threads")) s.threads = get_count(kv, "threads");
  if (const auto v = kv.get_double("rate")) {
    if (!(*v > 0.0)) throw ConfigError("rate: must be positive");
    s.rate = *v;
    s.rate_given = true;
  }
  if (const auto v = kv.get_string("input")) s.input = *v;
  if (const auto v = kv.get_string("output")) s.output = *v;
  if (const auto v = kv.get_string("poses")) s.poses = *v;
  if (const auto v = kv.get_string("labels")) s.labels = *v;
  if (const auto v = kv.get_string("scene")) s.scene = *v;
  if (const auto v = kv.get_string("format")) s.format = parse_format(*v);
  if (const auto v = kv.get_string("interpolation")) {
    if (*v == "linear") {
      s.interpolation = Interpolation::kLinear;
    } else if (*v == "nearest") {
      s.interpolation = Interpolation::kNearest;
    } else {
      throw ConfigError("interpolation: expected linear or nearest, got '" + *v + "'");
    }
  }
  if (const auto v = kv.get_bool("assign_frame_time")) s.assign_frame_time = *v;
  if (const auto v = kv.get_double("upsample_radius")) {
    if (!(*v > 0.0)) throw ConfigError("upsample_radius: must be positive");
    s.upsample_radius = *v;
  }
  if (const auto v = kv.get_double("range_limit")) {
    if (!(*v > 0.0)) throw ConfigError("range_limit: must be positive");
    s.range_limit = *v;
  }
  if (kv.has("seed")) s.seed = get_count(kv, "seed");
  if (kv.has("repetitions")) {
    s.repetitions = get_count(kv, "repetitions");
    if (s.repetitions < 1) throw ConfigError("repetitions: must be at least 1");
  }
  if (const auto v = kv.get_bool("follow")) s.follow = *v;
  if (const auto v = kv.get_double("follow_idle")) {
    if (!(*v >= 0.0)) throw ConfigError("follow_idle: must not be negative");
    s.follow_idle = *v;
  }
  return s;
}

ConfigEcho echo(const Settings& s) {
  const Params& p = s.params;
  auto num = [](double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
  };
  ConfigEcho e;
  e.emplace_back("N", std::to_string(p.half_window));
  e.emplace_back("radius", num(p.radius));
  e.emplace_back("thr", num(p.threshold));
  if (p.voxel.mode() == VoxelSetting::Mode::kFixed) {
    e.emplace_back("voxel", num(p.voxel.value()));
  } else {
    e.emplace_back("auto_voxel_divisor", num(p.voxel.value()));
  }
  e.emplace_back("min_neighbors", std::to_string(p.min_neighbors));
  e.emplace_back("min_distinct_frames", std::to_string(p.min_distinct_frames));
  e.emplace_back("time_scale", num(p.time_scale));
  e.emplace_back("index", s.strategy == IndexStrategy::kPerCloud ? "per_cloud" : "rebuild");
  e.emplace_back("rate", num(s.rate));
  e.emplace_back("upsample_radius", num(s.upsample_radius));
  e.emplace_back("range_limit", s.range_limit ? num(*s.range_limit) : "none");
  e.emplace_back("assign_frame_time", s.assign_frame_time ? "true" : "false");
  return e;
}

// ------------------------------------------------------------------ frame input

struct FrameSource {
  fs::path path;
  std::optional<double> stamp;
};

bool is_cloud_file(const fs::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".csv" || ext == ".ply" || ext == ".CSV" || ext == ".PLY";
}

// A directory containing `frames/` is a dataset root (as written by `synth`).
fs::path frame_directory(const fs::path& input) {
  if (fs::is_directory(input / "frames")) return input / "frames";
  return input;
}

std::optional<fs::path> dataset_file(const fs::path& input, const char* name) {
  if (!fs::is_directory(input / "frames")) return std::nullopt;
  const fs::path candidate = input / name;
  if (fs::is_regular_file(candidate)) return candidate;
  return std::nullopt;
}

std::vector<FrameSource> scan_directory(const fs::path& dir) {
  std::vector<FrameSource> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_cloud_file(entry.path())) out.push_back({entry.path(), {}});
  }
  std::sort(out.begin(), out.end(), [](const FrameSource& a, const FrameSource& b) {
    return a.path.filename().string() < b.path.filename().string();
  });
  return out;
}

std::vector<FrameSource> read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open manifest");
  std::vector<FrameSource> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string file;
    if (!(fields >> file)) continue;
    FrameSource src;
    src.path = fs::path(file).is_absolute() ? fs::path(file) : path.parent_path() / file;
    std::string stamp;
    if (fields >> stamp) {
      try {
        src.stamp = parse_number(stamp, "stamp");
      } catch (const ConfigError&) {
        throw ParseError(path.string(), line_no, "bad stamp '" + stamp + "'");
      }
    }
    out.push_back(std::move(src));
  }
  return out;
}

std::vector<FrameSource> list_frames(const fs::path& input) {
  if (input.empty()) throw ConfigError("--input is required");
  if (!fs::exists(input)) throw IoError(input.string(), "no such file or directory");
  if (fs::is_directory(input)) return scan_directory(frame_directory(input));
  if (is_cloud_file(input)) return {{input, {}}};
  return read_manifest(input);
}

struct LoadedFrame {
  fs::path path;
  Cloud cloud;  // world frame
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::size_t rows = 0;
  std::vector<std::size_t> dropped_rows;
};

LoadedFrame load_frame(const FrameSource& src, std::int64_t position, const Settings& s,
                       const Trajectory* trajectory, std::ostream& err) {
  const double stamp = src.stamp.value_or(static_cast<double>(position) * s.period());
  ReadOptions options;
  options.frame_index = position;
  if (s.assign_frame_time) options.constant_time = stamp;
  ReadStats stats;
  Cloud cloud = read_cloud(src.path, format_from_path(src.path), options, &stats);
  if (stats.rejected_non_finite > 0) {
    err << "warning: " << src.path.string() << ": dropped " << stats.rejected_non_finite
        << " non-finite points\n";
  }
  if (s.assign_frame_time) {
    for (auto& p : cloud.points) p.t = stamp;
    cloud.stamp = stamp;
  } else if (const std::size_t outliers = count_stamp_outliers(cloud, s.period())) {
    throw IoError(src.path.string(), std::to_string(outliers) +
                                         " points lie more than one frame period from the "
                                         "cloud stamp; check --rate or use --assign-frame-time");
  }
  LoadedFrame out;
  out.path = src.path;
  out.rows = stats.rows;
  out.dropped_rows = std::move(stats.dropped_rows);
  if (trajectory) {
    out.origin = trajectory->at(cloud.stamp, s.interpolation, s.period()).translation();
    out.cloud = apply_registration(cloud, *trajectory, s.interpolation, s.period());
  } else {
    out.cloud = std::move(cloud);
  }
  return out;
}

// Single-producer bounded queue used to read ahead of the detector.
template <typename T>
class BoundedQueue {
 public:
  explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

  void push(T item) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
    if (closed_) return;
    items_.push_back(std::move(item));
    not_empty_.notify_one();
  }

  std::optional<T> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !items_.empty() || finished_; });
    if (items_.empty()) return std::nullopt;
    T item = std::move(items_.front());
    items_.erase(items_.begin());
    not_full_.notify_one();
    return item;
  }

  void finish() {
    std::lock_guard lock(mutex_);
    finished_ = true;
    not_empty_.notify_all();
  }

  // Consumer side: unblock a producer that waits for space.
  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_full_.notify_all();
  }

 private:
  std::size_t capacity_;
  std::vector<T> items_;
  std::mutex mutex_;
  std::condition_variable not_full_, not_empty_;
  bool finished_ = false;
  bool closed_ = false;
};

using QueueItem = std::variant<LoadedFrame, std::exception_ptr>;

class FrameReader {
 public:
  FrameReader(const Settings& settings, const Trajectory* trajectory, std::ostream& err)
      : settings_(settings), trajectory_(trajectory), err_(err), queue_(2) {
    thread_ = std::jthread([this](std::stop_token stop) { produce(stop); });
  }
  ~FrameReader() {
    thread_.request_stop();
    queue_.close();
  }

  /// Next frame in order; rethrows reader failures; nullopt at the end.
  std::optional<LoadedFrame> next() {
    auto item = queue_.pop();
    if (!item) return std::nullopt;
    if (auto* error = std::get_if<std::exception_ptr>(&*item)) std::rethrow_exception(*error);
    return std::get<LoadedFrame>(std::move(*item));
  }

  std::size_t seen() const { return seen_; }

 private:
  void produce(std::stop_token stop) {
    try {
      std::vector<FrameSource> sources = list_frames(settings_.input);
      std::int64_t position = 0;
      std::string last_name;
      auto emit = [&](const FrameSource& src) {
        queue_.push(load_frame(src, position++, settings_, trajectory_, err_));
        ++seen_;
        last_name = src.path.filename().string();
      };
      for (const auto& src : sources) {
        if (stop.stop_requested()) break;
        emit(src);
      }
      if (settings_.follow && fs::is_directory(settings_.input)) {
        const fs::path dir = frame_directory(settings_.input);
        auto idle_since = std::chrono::steady_clock::now();
        while (!stop.stop_requested()) {
          bool any = false;
          for (const auto& src : scan_directory(dir)) {
            if (src.path.filename().string() <= last_name) continue;
            emit(src);
            any = true;
          }
          const auto now = std::chrono::steady_clock::now();
          if (any) idle_since = now;
          if (std::chrono::duration<double>(now - idle_since).count() >= settings_.follow_idle) {
            break;
          }
          std::this_thread::sleep_for(std::chrono::milliseconds(100));
        }
      }
    } catch (...) {
      queue_.push(std::current_exception());
    }
    queue_.finish();
  }

  const Settings& settings_;
  const Trajectory* trajectory_;
  std::ostream& err_;
  BoundedQueue<QueueItem> queue_;
  std::size_t seen_ = 0;
  std::jthread thread_;  // last: joins before the members it uses are destroyed
};

std::optional<Trajectory> load_trajectory(const Settings& s, std::ostream& err) {
  fs::path path = s.poses;
  if (path.empty()) {
    if (const auto found = dataset_file(s.input, "poses.txt")) {
      path = *found;
      err << "using poses from " << path.string() << '\n';
    }
  }
  if (path.empty()) return std::nullopt;
  return read_trajectory(path);
}

// frame -> labels indexed by file row
std::map<std::int64_t, std::vector<Label>> read_label_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open label file");
  std::string line;
  std::size_t line_no = 0;
  int col_frame = -1, col_index = -1, col_label = -1;
  std::map<std::int64_t, std::vector<int>> raw;
  auto split = [](const std::string& text) {
    std::vector<std::string> fields;
    std::stringstream ss(text);
    std::string f;
    while (std::getline(ss, f, ',')) {
      f.erase(0, f.find_first_not_of(" \t\r"));
      f.erase(f.find_last_not_of(" \t\r") + 1);
      fields.push_back(f);
    }
    return fields;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split(line);
    if (col_frame < 0) {
      for (int i = 0; i < static_cast<int>(fields.size()); ++i) {
        if (fields[i] == "frame") col_frame = i;
        if (fields[i] == "point_index") col_index = i;
        if (fields[i] == "label") col_label = i;
      }
      if (col_frame < 0) throw MissingFieldError(path.string(), "frame");
      if (col_index < 0) throw MissingFieldError(path.string(), "point_index");
      if (col_label < 0) throw MissingFieldError(path.string(), "label");
      continue;
    }
    const auto need = static_cast<std::size_t>(std::max({col_frame, col_index, col_label}));
    if (fields.size() <= need) throw ParseError(path.string(), line_no, "too few fields");
    long long frame = 0, index = 0;
    try {
      frame = std::stoll(fields[col_frame]);
      index = std::stoll(fields[col_index]);
    } catch (const std::exception&) {
      throw ParseError(path.string(), line_no, "bad frame or point index");
    }
    if (index < 0) throw ParseError(path.string(), line_no, "negative point index");
    const std::string& word = fields[col_label];
    int label = -1;
    if (word == "1" || word == "dynamic") label = 1;
    if (word == "0" || word == "static") label = 0;
    if (label < 0) throw ParseError(path.string(), line_no, "bad label '" + word + "'");
    auto& labels = raw[frame];
    if (labels.size() <= static_cast<std::size_t>(index)) labels.resize(index + 1, -1);
    if (labels[index] >= 0) throw ParseError(path.string(), line_no, "duplicate point index");
    labels[index] = label;
  }
  if (col_frame < 0) throw ParseError(path.string(), 1, "missing header");

  std::map<std::int64_t, std::vector<Label>> out;
  for (const auto& [frame, labels] : raw) {
    auto& dst = out[frame];
    dst.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) {
        throw IoError(path.string(), "frame " + std::to_string(frame) + " has no label for point " +
                                         std::to_string(i));
      }
      dst.push_back(labels[i] ? Label::kDynamic : Label::kStatic);
    }
  }
  return out;
}

fs::path require_output_dir(const Settings& s) {
  if (s.output.empty()) throw ConfigError("--output is required");
  std::error_code ec;
  fs::create_directories(s.output, ec);
  if (ec) throw IoError(s.output.string(), "cannot create directory: " + ec.message());
  return s.output;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw IoError(path.string(), "write failed");
}

const char* extension(CloudFormat f) { return f == CloudFormat::kPly ? ".ply" : ".csv"; }

// ------------------------------------------------------------------ subcommands

int cmd_detect(const Settings& s, std::ostream& out, std::ostream& err) {
  const fs::path out_dir = require_output_dir(s);
  const std::optional<Trajectory> trajectory = load_trajectory(s, err);
  const Params& p = s.params;
  out << "latency: " << latency(p, s.rate) << " s (N=" << p.half_window << " at " << s.rate
      << " Hz)\n";

  Detector detector(p, s.strategy, s.threads);
  std::deque<std::pair<std::int64_t, fs::path>> names;  // frames still inside the window
  std::size_t classified = 0;
  WriteOptions write_options;
  write_options.allow_empty = true;

  FrameReader reader(s, trajectory ? &*trajectory : nullptr, err);
  while (auto frame = reader.next()) {
    names.emplace_back(frame->cloud.frame_index, frame->path);
    auto result = detector.process(frame->cloud);
    if (!result) continue;
    while (names.front().first < result->target.frame_index) names.pop_front();
    const fs::path source = names.front().second;
    names.pop_front();
    const CloudFormat fmt = s.format.value_or(format_from_path(source));
    const Classification parts = partition(result->scored);
    const std::string stem = source.stem().string();
    write_scored(parts.dynamic_points, out_dir / (stem + "_dynamic" + extension(fmt)), fmt,
                 write_options);
    write_scored(parts.static_points, out_dir / (stem + "_static" + extension(fmt)), fmt,
                 write_options);
    ++classified;
    out << "frame " << result->target.frame_index << " (" << source.filename().string()
        << "): " << parts.dynamic_points.size() << " dynamic, " << parts.static_points.size()
        << " static, " << std::fixed << std::setprecision(1) << result->timings.total_ms()
        << " ms\n"
        << std::defaultfloat;
  }
  if (classified == 0) {
    err << "warning: window never filled (" << reader.seen() << " frames read, "
        << p.window_size() << " needed); nothing classified\n";
  }
  out << "classified " << classified << " of " << reader.seen() << " frames\n";
  return kSuccess;
}

int cmd_eval(const Settings& s, std::ostream& out, std::ostream& err) {
  fs::path label_path = s.labels;
  if (label_path.empty()) {
    if (const auto found = dataset_file(s.input, "labels.csv")) label_path = *found;
  }
  if (label_path.empty()) throw IoError("labels", "no label file given (use --labels)");
  const auto labels = read_label_table(label_path);
  const std::optional<Trajectory> trajectory = load_trajectory(s, err);

  EvalOptions options;
  options.upsample_radius = s.upsample_radius;
  options.range_limit = s.range_limit;
  options.strategy = s.strategy;
  options.threads = s.threads;
  SequenceEvaluator evaluator(s.params, options);

  FrameReader reader(s, trajectory ? &*trajectory : nullptr, err);
  while (auto frame = reader.next()) {
    const std::int64_t k = frame->cloud.frame_index;
    const auto it = labels.find(k);
    if (it == labels.end()) {
      throw IoError(label_path.string(), "no labels for frame " + std::to_string(k));
    }
    if (it->second.size() != frame->rows) {
      throw IoError(label_path.string(),
                    "frame " + std::to_string(k) + " has " + std::to_string(it->second.size()) +
                        " labels for " + std::to_string(frame->rows) + " points");
    }
    std::vector<Label> truth;
    truth.reserve(frame->cloud.points.size());
    std::size_t skip = 0;
    for (std::size_t i = 0; i < it->second.size(); ++i) {
      if (skip < frame->dropped_rows.size() && frame->dropped_rows[skip] == i) {
        ++skip;
        continue;
      }
      truth.push_back(it->second[i]);
    }
    evaluator.push({std::move(frame->cloud), std::move(truth), frame->origin});
  }

  const EvalReport& report = evaluator.report();
  const ConfigEcho config = echo(s);
  if (!s.output.empty()) {
    const fs::path dir = require_output_dir(s);
    std::ostringstream text, metrics;
    write_report_text(text, report, config);
    write_metrics(metrics, report, config);
    write_text_file(dir / "report.txt", text.str());
    write_text_file(dir / "metrics.txt", metrics.str());
  }
  if (report.no_frames_evaluated()) {
    err << "warning: window never filled (" << reader.seen() << " frames read, "
        << s.params.window_size() << " needed); no frames evaluated\n";
  }
  const auto& c = report.total;
  out << "iou=" << std::setprecision(6) << report.iou() << " frames=" << report.frames.size()
      << " tp=" << c.tp << " fp=" << c.fp << " fn=" << c.fn << " tn=" << c.tn
      << (report.vacuous() ? " (vacuous)" : "") << '\n';
  return kSuccess;
}

SceneSpec scene_from_settings(const Settings& s) {
  if (s.scene.empty()) throw ConfigError("--scene is required");
  SceneSpec spec = load_scene(s.scene);
  if (s.seed) spec.sensor.seed = *s.seed;
  if (s.rate_given) spec.sensor.frame_rate = s.rate;
  return spec;
}

int cmd_synth(const Settings& s, std::ostream& out, std::ostream& err) {
  const SceneSpec spec = scene_from_settings(s);
  const fs::path dir = require_output_dir(s);
  const fs::path frames_dir = dir / "frames";
  fs::create_directories(frames_dir);
  const CloudFormat fmt = s.format.value_or(CloudFormat::kCsv);
  const SceneGenerator generator(spec);
  if (spec.sensor.frames < s.params.window_size()) {
    err << "warning: " << spec.sensor.frames << " frames never fill a window of "
        << s.params.window_size() << " (N=" << s.params.half_window << ")\n";
  }

  std::ofstream labels(dir / "labels.csv");
  if (!labels) throw IoError((dir / "labels.csv").string(), "cannot open for writing");
  labels << "frame,point_index,label\n";
  std::vector<Pose> poses;
  const Eigen::Vector3d& origin = spec.sensor.origin;
  std::size_t dynamic = 0, total = 0;
  for (std::size_t k = 0; k < generator.frame_count(); ++k) {
    LabeledCloud frame = generator.frame(k);
    for (auto& p : frame.cloud.points) {
      p.x -= origin.x();
      p.y -= origin.y();
      p.z -= origin.z();
    }
    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06zu", k);
    write_cloud(frame.cloud, frames_dir / (std::string(name) + extension(fmt)), fmt);
    for (std::size_t i = 0; i < frame.labels.size(); ++i) {
      labels << k << ',' << i << ',' << (frame.labels[i] == Label::kDynamic ? 1 : 0) << '\n';
      dynamic += frame.labels[i] == Label::kDynamic;
    }
    total += frame.labels.size();
    poses.emplace_back(generator.frame_stamp(k), origin, Eigen::Quaterniond::Identity());
  }
  if (!labels) throw IoError((dir / "labels.csv").string(), "write failed");
  write_trajectory(Trajectory(std::move(poses)), dir / "poses.txt");
  out << "wrote " << generator.frame_count() << " frames (" << total << " points, " << dynamic
      << " dynamic) to " << dir.string() << '\n';
  return kSuccess;
}

int cmd_bench(const Settings& s, std::ostream& out, std::ostream& err) {
  std::vector<Cloud> clouds;
  double rate = s.rate;
  if (!s.scene.empty()) {
    const SceneSpec spec = scene_from_settings(s);
    rate = spec.sensor.frame_rate;
    const SceneGenerator generator(spec);
    for (std::size_t k = 0; k < generator.frame_count(); ++k) {
      clouds.push_back(generator.frame(k).cloud);
    }
  } else {
    const std::optional<Trajectory> trajectory = load_trajectory(s, err);
    FrameReader reader(s, trajectory ? &*trajectory : nullptr, err);
    while (auto frame = reader.next()) clouds.push_back(std::move(frame->cloud));
  }
  const BenchReport report = bench(clouds, s.params, s.repetitions, rate, s.strategy, s.threads);
  if (report.frames.empty()) {
    err << "warning: window never filled (" << clouds.size() << " frames, "
        << s.params.window_size() << " needed); nothing timed\n";
  }
  const ConfigEcho config = echo(s);
  std::ostringstream text;
  write_bench_text(text, report, config);
  out << text.str();
  if (!s.output.empty()) {
    const fs::path dir = require_output_dir(s);
    std::ostringstream metrics;
    write_bench_metrics(metrics, report);
    write_text_file(dir / "bench.txt", text.str());
    write_text_file(dir / "metrics.txt", metrics.str());
  }
  return kSuccess;
}

// ------------------------------------------------------------------ dispatch

struct Command {
  const char* name;
  const char* help;
  std::vector<const char*> keys;
  int (*handler)(const Settings&, std::ostream&, std::ostream&);
};

const std::vector<const char*> kCoreKeys = {
    "N",         "radius", "thr",   "voxel", "auto_voxel_divisor", "min_neighbors",
    "min_distinct_frames", "time_scale", "index", "threads", "rate"};

std::vector<const char*> with_core(std::initializer_list<const char*> extra) {
  std::vector<const char*> keys = kCoreKeys;
  keys.insert(keys.end(), extra);
  return keys;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  const std::vector<Command> commands = {
      {"detect", "classify every frame of a sequence into dynamic and static points",
       with_core({"input", "output", "poses", "interpolation", "format", "assign_frame_time",
                  "follow", "follow_idle"}),
       cmd_detect},
      {"eval", "run detection against ground-truth labels and report IoU",
       with_core({"input", "output", "poses", "interpolation", "assign_frame_time", "labels",
                  "upsample_radius", "range_limit"}),
       cmd_eval},
      {"synth", "generate a labeled synthetic sequence from a scene file",
       with_core({"scene", "output", "seed", "format"}), cmd_synth},
      {"bench", "time the pipeline stages on a scene or recorded sequence",
       with_core({"scene", "seed", "input", "output", "poses", "interpolation",
                  "assign_frame_time", "repetitions"}),
       cmd_bench},
  };

  CLI::App app("Spatiotemporal-normal moving object detection", "stnormal");
  app.require_subcommand(1);
  std::string config_path;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
  std::vector<std::pair<std::string, CLI::Option*>> given;

  for (const auto& cmd : commands) {
    CLI::App* sub = app.add_subcommand(cmd.name, cmd.help);
    sub->add_option("--config", config_path, "flat key = value file; flags override it");
    for (const char* key : cmd.keys) {
      const auto spec = std::find_if(std::begin(kKeys), std::end(kKeys),
                                     [&](const KeySpec& k) { return std::string_view(k.key) == key; });
      CLI::Option* opt = spec->is_flag ? sub->add_flag(flag_name(key), flags[key], spec->help)
                                       : sub->add_option(flag_name(key), values[key], spec->help);
      given.emplace_back(key, opt);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kConfigFailure;
  }

  try {
    KeyValueFile effective;
    if (!config_path.empty()) effective = KeyValueFile::load(config_path);
    for (const auto& [key, opt] : given) {
      if (opt->count() == 0) continue;
      if (key == "voxel") effective.erase("auto_voxel_divisor");
      if (key == "auto_voxel_divisor") effective.erase("voxel");
      effective.set(key, flags.count(key) ? (flags[key] ? "true" : "false") : values[key]);
    }
    // Both voxel flags on the command line at once is a conflict, not an override.
    const auto flag_given = [&](const char* key) {
      return std::any_of(given.begin(), given.end(),
                         [&](const auto& g) { return g.first == key && g.second->count() > 0; });
    };
    if (flag_given("voxel") && flag_given("auto_voxel_divisor")) {
      throw ConfigError("set exactly one of --voxel and --auto-voxel-divisor");
    }
    const Settings settings = resolve_settings(effective);
    for (const auto& cmd : commands) {
      if (app.got_subcommand(cmd.name)) return cmd.handler(settings, out, err);
    }
    return kConfigFailure;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const std::invalid_argument& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigFailure;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const Error& e) {
    err << "input error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const fs::filesystem_error& e) {
    err << "input error: " << e.what() << '\n';
    return kIoFailure;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kNumericalFailure;
  }
}

}  // namespace stnormal::cli
