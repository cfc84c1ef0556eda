// Shared plumbing for the binderkit executable: run manifests, content
// hashes, fixed-precision output, a small worker pool and model loading.

#ifndef BINDERKIT_TOOLS_CLI_SUPPORT_HPP_
#define BINDERKIT_TOOLS_CLI_SUPPORT_HPP_

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "binderkit/core/file.hpp"
#include "binderkit/model/rednet.hpp"

namespace binderkit::cli {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "0.1.0";
inline constexpr const char* kEnvPrefix = "BINDERKIT_";

// %.17g, the precision used for every float written by the tool.
inline std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

namespace detail {

inline void dump_json(const Json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string end_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first)
          out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        dump_json(it.value(), out, indent + 2);
      }
      out += "\n" + end_pad + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i)
          out += ",\n";
        out += pad;
        dump_json(j[i], out, indent + 2);
      }
      out += "\n" + end_pad + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      out += std::isfinite(v) ? fmt(v) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

} // namespace detail

// JSON text with floats at 17 significant digits.
inline std::string to_json_text(const Json& j) {
  std::string out;
  detail::dump_json(j, out, 0);
  out += "\n";
  return out;
}

inline Json json_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// Records inputs, outputs and the effective configuration of one run.
class Run {
public:
  explicit Run(std::string command) : command_(std::move(command)) {}

  void set_config(Json config) { config_ = std::move(config); }
  Json& summary() { return summary_; }

  std::string read(const std::string& path) {
    std::string data = read_file(path);
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(data)}});
    return data;
  }
  void note_input(const std::string& path, std::string_view data) {
    inputs_.push_back({{"path", path}, {"sha256", sha256_hex(data)}});
  }
  void write(const std::string& path, std::string_view data) {
    write_file(path, data);
    outputs_.push_back({{"path", path}, {"sha256", sha256_hex(data)}});
  }

  void write_manifest(const std::string& path) const {
    Json m;
    m["tool"] = "binderkit";
    m["version"] = kVersion;
    m["command"] = command_;
    m["config"] = config_;
    m["inputs"] = inputs_;
    m["outputs"] = outputs_;
    m["summary"] = summary_.is_null() ? Json::object() : summary_;
    write_file(path, to_json_text(m));
  }

private:
  std::string command_;
  Json config_ = Json::object();
  Json inputs_ = Json::array();
  Json outputs_ = Json::array();
  Json summary_;
};

// Echo of every named option of `app` (defaults included).
inline Json options_json(const CLI::App& app) {
  Json out = Json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front() == "help" || opt->get_lnames().front() == "version")
      continue;
    const std::string& name = opt->get_lnames().front();
    const bool flag = opt->get_expected_max() == 0;
    if (flag) {
      out[name] = opt->count() > 0 && opt->as<bool>();
      continue;
    }
    if (opt->count() == 0) {
      const std::string d = opt->get_default_str();
      out[name] = d.empty() ? Json(nullptr) : Json(d);
      continue;
    }
    const std::vector<std::string>& r = opt->results();
    out[name] = opt->get_expected_max() > 1 ? Json(r) : Json(r.back());
  }
  return out;
}

// BINDERKIT_<FLAG> environment overrides for every long option of `app`
// and its subcommands.
inline void bind_env(CLI::App& app) {
  for (CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty())
      continue;
    if (opt->get_lnames().front() == "help" || opt->get_lnames().front() == "version")
      continue;
    std::string env = kEnvPrefix;
    for (char c : opt->get_lnames().front())
      env.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    opt->envname(env);
  }
  for (CLI::App* sub : app.get_subcommands({}))
    bind_env(*sub);
}

// Runs fn(i, worker) for i in [0, n) on up to `threads` workers. Results
// must be written by index; the first exception by index is rethrown.
template <typename F>
void parallel_for(int n, int threads, F&& fn) {
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i)
      fn(i, 0);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (int i = next++; i < n; i = next++) {
        try {
          fn(i, w);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (std::thread& t : pool)
    t.join();
  for (const std::exception_ptr& e : errors)
    if (e)
      std::rethrow_exception(e);
}

inline int resolve_threads(int threads) {
  if (threads > 0)
    return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

struct ModelSource {
  std::string weights;
  std::string config;
  std::uint64_t init_seed = 0;
};

// Weights from `weights` (config from `config`, else `<weights>.cfg`, else
// the toy configuration); randomly initialized from `init_seed` when no
// weights are given.
inline RedNet<double> load_model(const ModelSource& src, Run& run) {
  ModelConfig cfg = ModelConfig::toy();
  std::string cfg_path = src.config;
  if (cfg_path.empty() && !src.weights.empty() && std::filesystem::exists(src.weights + ".cfg"))
    cfg_path = src.weights + ".cfg";
  if (!cfg_path.empty())
    cfg = config_from_text(run.read(cfg_path), cfg);
  RedNet<double> model = init_model<double>(cfg, src.init_seed);
  if (!src.weights.empty())
    decode_params_into(model.params, run.read(src.weights));
  else
    std::cerr << "binderkit: no --weights given, using random weights (seed " << src.init_seed << ")\n";
  return model;
}

inline void add_model_options(CLI::App& app, ModelSource& src) {
  app.add_option("--weights", src.weights, "Weight container written by train-toy");
  app.add_option("--config", src.config, "Model config key-value file (default: <weights>.cfg or toy)");
}

inline Structure load_structure(const std::string& path, Run& run) {
  const std::string bytes = run.read(path);
  return parse_structure(bytes, detect_format(path), std::filesystem::path(path).stem().string());
}

inline int chain_index(const Structure& s, const std::string& id) {
  for (int c = 0; c < static_cast<int>(s.chains.size()); ++c)
    if (s.chains[c].id == id)
      return c;
  fail(ErrorKind::Contract, "structure '" + s.id + "' has no chain '" + id + "'");
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t p = s.find(sep, start);
    out.emplace_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos)
      return out;
    start = p + 1;
  }
}

inline std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  for (std::string& l : split(text, '\n')) {
    if (!l.empty() && l.back() == '\r')
      l.pop_back();
    out.push_back(std::move(l));
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& where) {
  double v = 0;
  if (!binderkit::detail::parse_double(s, v))
    fail(ErrorKind::Parse, where + ": bad number '" + s + "'");
  return v;
}

// Tab-separated table with a header row.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name, const std::string& path) const {
    for (int i = 0; i < static_cast<int>(header.size()); ++i)
      if (header[i] == name)
        return i;
    fail(ErrorKind::Parse, path + ": missing column '" + name + "'");
  }
};

inline Table parse_tsv(std::string_view text, const std::string& path) {
  Table t;
  int line_no = 0;
  for (const std::string& line : lines_of(text)) {
    ++line_no;
    if (line.empty() || line[0] == '#')
      continue;
    std::vector<std::string> cells = split(line, '\t');
    if (t.header.empty()) {
      t.header = std::move(cells);
      continue;
    }
    if (cells.size() != t.header.size())
      fail(ErrorKind::Parse, path + " line " + std::to_string(line_no) + ": " + std::to_string(cells.size()) +
                                 " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty())
    fail(ErrorKind::Parse, path + ": empty table");
  return t;
}

// First record of a FASTA file.
inline std::string read_fasta_sequence(std::string_view text, const std::string& path) {
  std::string seq;
  bool seen = false;
  for (const std::string& line : lines_of(text)) {
    if (!line.empty() && line[0] == '>') {
      if (seen)
        break;
      seen = true;
      continue;
    }
    for (char c : line)
      if (!std::isspace(static_cast<unsigned char>(c)))
        seq.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (seq.empty())
    fail(ErrorKind::Parse, path + ": no sequence");
  return seq;
}

} // namespace binderkit::cli

#endif
