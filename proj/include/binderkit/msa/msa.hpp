// Multiple sequence alignments: A3M and Stockholm parsing, species tags,
// aligned identity and the A3M writer.
//
// Rows are match-state strings over upper-case residue letters and '-'.
// A3M insertions (lower case, '.') are dropped on parse. Stockholm columns
// where the first sequence has a gap are dropped so that row 0 defines the
// match states, as in A3M.
//
// Species tags: `OX=<taxid>` in the header gives "OX:<taxid>"; otherwise a
// UniProt mnemonic suffix on the first header token (e.g. `ABC_HUMAN`) gives
// the suffix. Rows without either carry no tag and are never paired.

#ifndef BINDERKIT_MSA_MSA_HPP_
#define BINDERKIT_MSA_MSA_HPP_

#include <cctype>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "../core/error.hpp"
#include "../core/file.hpp"

namespace binderkit {

inline constexpr char kGap = '-';

struct MsaRow {
  std::string header;
  std::string aligned;
  std::optional<std::string> species;
  std::optional<double> similarity;
};

// rows[0] is the query.
struct MsaBlock {
  std::vector<MsaRow> rows;

  int depth() const { return static_cast<int>(rows.size()); }
  int width() const { return rows.empty() ? 0 : static_cast<int>(rows[0].aligned.size()); }
  const MsaRow& query() const { return rows.at(0); }

  std::vector<std::string> sequences() const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const MsaRow& r : rows)
      out.push_back(r.aligned);
    return out;
  }

  void validate() const {
    if (rows.empty())
      fail(ErrorKind::Contract, "MSA has no query row");
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (static_cast<int>(rows[i].aligned.size()) != width())
        fail(ErrorKind::Contract, "MSA row " + std::to_string(i) + " has aligned length " +
                                      std::to_string(rows[i].aligned.size()) + ", query has " +
                                      std::to_string(width()));
  }
};

inline std::optional<std::string> species_from_header(std::string_view header) {
  for (std::size_t p = header.find("OX="); p != std::string_view::npos; p = header.find("OX=", p + 1)) {
    if (p > 0 && !std::isspace(static_cast<unsigned char>(header[p - 1])))
      continue;
    std::size_t e = p + 3;
    while (e < header.size() && std::isdigit(static_cast<unsigned char>(header[e])))
      ++e;
    if (e > p + 3)
      return "OX:" + std::string(header.substr(p + 3, e - p - 3));
  }
  std::string_view tok = header.substr(0, header.find_first_of(" \t"));
  std::size_t us = tok.rfind('_');
  if (us == std::string_view::npos || us + 1 >= tok.size())
    return std::nullopt;
  std::string_view suffix = tok.substr(us + 1);
  if (suffix.size() > 5)
    return std::nullopt;
  for (char c : suffix)
    if (!std::isupper(static_cast<unsigned char>(c)) && !std::isdigit(static_cast<unsigned char>(c)))
      return std::nullopt;
  return std::string(suffix);
}

// Fraction of identical residues over columns that are non-gap in both rows;
// 0 when no such column exists.
inline double aligned_identity(std::string_view a, std::string_view b) {
  require(a.size() == b.size(), "identity needs rows of equal aligned length");
  int match = 0, cols = 0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] == kGap || b[c] == kGap)
      continue;
    ++cols;
    match += a[c] == b[c];
  }
  return cols == 0 ? 0.0 : static_cast<double>(match) / cols;
}

namespace detail {

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t e = text.find('\n', pos);
    if (e == std::string_view::npos)
      e = text.size();
    std::string_view line = text.substr(pos, e - pos);
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    out.push_back(line);
    pos = e + 1;
  }
  return out;
}

inline std::string_view strip(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

inline MsaRow make_row(std::string header, std::string aligned) {
  MsaRow r;
  r.species = species_from_header(header);
  r.header = std::move(header);
  r.aligned = std::move(aligned);
  return r;
}

} // namespace detail

inline MsaBlock parse_a3m(std::string_view text) {
  MsaBlock m;
  std::optional<std::string> header;
  std::string seq;
  int line_no = 0;
  auto flush = [&] {
    if (header)
      m.rows.push_back(detail::make_row(std::move(*header), std::move(seq)));
    header.reset();
    seq.clear();
  };
  for (std::string_view line : detail::split_lines(text)) {
    ++line_no;
    line = detail::strip(line);
    if (line.empty() || line.front() == '#')
      continue;
    if (line.front() == '>') {
      flush();
      header = std::string(detail::strip(line.substr(1)));
      continue;
    }
    if (!header)
      fail(ErrorKind::Parse, "A3M line " + std::to_string(line_no) + ": sequence before first header");
    for (char c : line) {
      if (std::islower(static_cast<unsigned char>(c)) || c == '.')
        continue;
      if (c == kGap || std::isupper(static_cast<unsigned char>(c)))
        seq.push_back(c);
      else if (c == '*')
        continue;
      else
        fail(ErrorKind::Parse, "A3M line " + std::to_string(line_no) + ": unexpected character '" +
                                   std::string(1, c) + "'");
    }
  }
  flush();
  if (m.rows.empty())
    fail(ErrorKind::Parse, "A3M contains no sequences");
  for (std::size_t i = 0; i < m.rows.size(); ++i)
    if (m.rows[i].aligned.size() != m.rows[0].aligned.size())
      fail(ErrorKind::Parse, "A3M record " + std::to_string(i) + " ('" + m.rows[i].header + "') has " +
                                 std::to_string(m.rows[i].aligned.size()) + " match columns, query has " +
                                 std::to_string(m.rows[0].aligned.size()));
  return m;
}

// Single- or multi-block Stockholm. `#=GS <name> OX <taxid>` and
// `#=GS <name> DE ... OX=<taxid>` annotations supply species tags.
inline MsaBlock parse_stockholm(std::string_view text) {
  std::vector<std::string> order;
  std::map<std::string, std::string> seqs;
  std::map<std::string, std::string> annot;
  bool header_seen = false, terminated = false;
  int line_no = 0;
  for (std::string_view raw : detail::split_lines(text)) {
    ++line_no;
    std::string_view line = detail::strip(raw);
    if (line.empty())
      continue;
    if (!header_seen) {
      if (line.rfind("# STOCKHOLM", 0) != 0)
        fail(ErrorKind::Parse, "Stockholm line " + std::to_string(line_no) + ": missing '# STOCKHOLM' header");
      header_seen = true;
      continue;
    }
    if (line == "//") {
      terminated = true;
      break;
    }
    if (line.rfind("#=GS", 0) == 0) {
      std::string_view rest = detail::strip(line.substr(4));
      std::size_t sp = rest.find_first_of(" \t");
      if (sp == std::string_view::npos)
        continue;
      std::string name(rest.substr(0, sp));
      std::string_view tail = detail::strip(rest.substr(sp));
      if (tail.rfind("OX", 0) == 0 && tail.size() > 2 && std::isspace(static_cast<unsigned char>(tail[2])))
        annot[name] += " OX=" + std::string(detail::strip(tail.substr(2)));
      else if (tail.rfind("DE", 0) == 0)
        annot[name] += " " + std::string(detail::strip(tail.substr(2)));
      continue;
    }
    if (line.front() == '#')
      continue;
    std::size_t sp = line.find_first_of(" \t");
    if (sp == std::string_view::npos)
      fail(ErrorKind::Parse, "Stockholm line " + std::to_string(line_no) + ": expected '<name> <sequence>'");
    std::string name(line.substr(0, sp));
    if (!seqs.count(name))
      order.push_back(name);
    seqs[name] += std::string(detail::strip(line.substr(sp)));
  }
  if (!header_seen)
    fail(ErrorKind::Parse, "Stockholm input is empty");
  if (!terminated)
    fail(ErrorKind::Parse, "Stockholm alignment lacks the '//' terminator");
  if (order.empty())
    fail(ErrorKind::Parse, "Stockholm alignment contains no sequences");
  const std::string& q = seqs[order[0]];
  for (const std::string& name : order)
    if (seqs[name].size() != q.size())
      fail(ErrorKind::Parse, "Stockholm sequence '" + name + "' has " + std::to_string(seqs[name].size()) +
                                 " columns, first sequence has " + std::to_string(q.size()));
  MsaBlock m;
  for (const std::string& name : order) {
    const std::string& s = seqs[name];
    std::string aligned;
    for (std::size_t c = 0; c < s.size(); ++c) {
      if (q[c] == '-' || q[c] == '.')
        continue;
      char x = s[c];
      if (x == '.' || x == '-')
        aligned.push_back(kGap);
      else if (std::isalpha(static_cast<unsigned char>(x)))
        aligned.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(x))));
      else
        fail(ErrorKind::Parse, "Stockholm sequence '" + name + "': unexpected character '" +
                                   std::string(1, x) + "'");
    }
    auto it = annot.find(name);
    m.rows.push_back(detail::make_row(name + (it == annot.end() ? "" : it->second), std::move(aligned)));
  }
  return m;
}

inline MsaBlock read_msa(const std::filesystem::path& path) {
  std::string text = read_file(path);
  std::string ext = path.extension().string();
  if (ext == ".sto" || ext == ".stk" || ext == ".stockholm" || text.rfind("# STOCKHOLM", 0) == 0)
    return parse_stockholm(text);
  return parse_a3m(text);
}

inline std::string write_a3m(const MsaBlock& m) {
  std::string out;
  for (const MsaRow& r : m.rows) {
    out += '>';
    out += r.header;
    out += '\n';
    out += r.aligned;
    out += '\n';
  }
  return out;
}

} // namespace binderkit

#endif
