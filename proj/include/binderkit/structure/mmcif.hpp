// mmCIF reader (atom_site category loop plus a few scalar items) and writer.

#ifndef BINDERKIT_STRUCTURE_MMCIF_HPP_
#define BINDERKIT_STRUCTURE_MMCIF_HPP_

#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "builder.hpp"

namespace binderkit {

namespace cif {

struct Token {
  std::string text;
  bool quoted = false;
  int line = 0;
};

// Splits CIF text into whitespace-separated tokens, honoring quotes,
// semicolon text fields and comments.
inline std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t i = 0, n = text.size();
  int line = 1;
  bool line_start = true;
  while (i < n) {
    char c = text[i];
    if (c == '\n') {
      ++line;
      ++i;
      line_start = true;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      line_start = false;
      continue;
    }
    if (c == '#') {
      while (i < n && text[i] != '\n')
        ++i;
      continue;
    }
    if (c == ';' && line_start) {
      int start_line = line;
      std::size_t body = i + 1;
      std::size_t pos = body;
      for (;;) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
          fail(ErrorKind::Parse, "mmCIF line " + std::to_string(start_line) +
                                     ": unterminated text field");
        ++line;
        if (nl + 1 < n && text[nl + 1] == ';') {
          std::string value(text.substr(body, nl - body));
          out.push_back({std::move(value), true, start_line});
          i = nl + 2;
          break;
        }
        pos = nl + 1;
      }
      line_start = false;
      continue;
    }
    if (c == '\'' || c == '"') {
      // A closing quote must be followed by whitespace or end of input.
      std::size_t j = i + 1;
      while (j < n) {
        if (text[j] == '\n')
          fail(ErrorKind::Parse, "mmCIF line " + std::to_string(line) + ": unterminated quote");
        if (text[j] == c && (j + 1 == n || std::isspace(static_cast<unsigned char>(text[j + 1]))))
          break;
        ++j;
      }
      if (j >= n)
        fail(ErrorKind::Parse, "mmCIF line " + std::to_string(line) + ": unterminated quote");
      out.push_back({std::string(text.substr(i + 1, j - i - 1)), true, line});
      i = j + 1;
      line_start = false;
      continue;
    }
    std::size_t j = i;
    while (j < n && !std::isspace(static_cast<unsigned char>(text[j])))
      ++j;
    out.push_back({std::string(text.substr(i, j - i)), false, line});
    i = j;
    line_start = false;
  }
  return out;
}

inline bool is_null(const Token& t) {
  return !t.quoted && (t.text == "?" || t.text == ".");
}

struct Loop {
  std::vector<std::string> tags;
  std::vector<std::vector<Token>> rows;

  int column(std::string_view tag) const {
    for (int i = 0; i < static_cast<int>(tags.size()); ++i)
      if (tags[i] == tag)
        return i;
    return -1;
  }
};

struct Block {
  std::string name;
  std::map<std::string, Token> items;
  std::map<std::string, Loop> loops;  // keyed by category, e.g. "_atom_site"

  const Token* item(const std::string& tag) const {
    auto it = items.find(tag);
    return it == items.end() ? nullptr : &it->second;
  }
};

inline std::string category_of(std::string_view tag) {
  auto dot = tag.find('.');
  return std::string(dot == std::string_view::npos ? tag : tag.substr(0, dot));
}

inline Block parse_block(std::string_view text) {
  std::vector<Token> toks = tokenize(text);
  Block block;
  std::size_t i = 0;
  auto keyword = [](const Token& t, std::string_view kw) {
    if (t.quoted || t.text.size() < kw.size())
      return false;
    for (std::size_t k = 0; k < kw.size(); ++k)
      if (std::tolower(static_cast<unsigned char>(t.text[k])) != kw[k])
        return false;
    return true;
  };
  while (i < toks.size()) {
    const Token& t = toks[i];
    if (keyword(t, "data_")) {
      if (!block.name.empty())
        break;  // first data block only
      block.name = t.text.substr(5);
      ++i;
    } else if (keyword(t, "loop_") && t.text.size() == 5) {
      ++i;
      Loop loop;
      while (i < toks.size() && !toks[i].quoted && !toks[i].text.empty() && toks[i].text[0] == '_')
        loop.tags.push_back(toks[i++].text);
      if (loop.tags.empty())
        fail(ErrorKind::Parse, "mmCIF line " + std::to_string(t.line) + ": loop_ without tags");
      std::vector<Token> values;
      while (i < toks.size()) {
        const Token& v = toks[i];
        if (!v.quoted && (v.text[0] == '_' || keyword(v, "loop_") || keyword(v, "data_")))
          break;
        values.push_back(v);
        ++i;
      }
      if (values.size() % loop.tags.size() != 0)
        fail(ErrorKind::Parse, "mmCIF line " + std::to_string(t.line) + ": loop of " +
                                   std::to_string(loop.tags.size()) + " tags has " +
                                   std::to_string(values.size()) + " values");
      for (std::size_t r = 0; r < values.size(); r += loop.tags.size())
        loop.rows.emplace_back(values.begin() + r, values.begin() + r + loop.tags.size());
      std::string cat = category_of(loop.tags.front());
      block.loops[cat] = std::move(loop);
    } else if (!t.quoted && !t.text.empty() && t.text[0] == '_') {
      if (i + 1 >= toks.size())
        fail(ErrorKind::Parse, "mmCIF line " + std::to_string(t.line) + ": tag '" + t.text +
                                   "' without value");
      block.items[t.text] = toks[i + 1];
      i += 2;
    } else {
      fail(ErrorKind::Parse, "mmCIF line " + std::to_string(t.line) + ": unexpected token '" +
                                 t.text + "'");
    }
  }
  return block;
}

} // namespace cif

// The entry id is taken from _entry.id, then the data block name, then `id`.
inline Structure parse_mmcif(std::string_view text, std::string id = {}) {
  cif::Block block = cif::parse_block(text);
  if (const cif::Token* t = block.item("_entry.id"); t && !cif::is_null(*t))
    id = t->text;
  else if (!block.name.empty())
    id = block.name;

  auto it = block.loops.find("_atom_site");
  if (it == block.loops.end())
    fail(ErrorKind::EmptyStructure, "mmCIF '" + id + "' has no _atom_site loop");
  const cif::Loop& loop = it->second;

  auto col = [&](std::string_view tag, bool required) {
    int c = loop.column("_atom_site." + std::string(tag));
    if (c < 0 && required)
      fail(ErrorKind::Parse, "mmCIF: _atom_site." + std::string(tag) + " missing");
    return c;
  };
  int c_group = col("group_PDB", false);
  int c_elem = col("type_symbol", false);
  int c_atom = col("label_atom_id", false);
  int c_auth_atom = col("auth_atom_id", false);
  int c_alt = col("label_alt_id", false);
  int c_comp = col("label_comp_id", false);
  int c_auth_comp = col("auth_comp_id", false);
  int c_asym = col("label_asym_id", false);
  int c_auth_asym = col("auth_asym_id", false);
  int c_seq = col("label_seq_id", false);
  int c_auth_seq = col("auth_seq_id", false);
  int c_ins = col("pdbx_PDB_ins_code", false);
  int c_x = col("Cartn_x", true), c_y = col("Cartn_y", true), c_z = col("Cartn_z", true);
  int c_occ = col("occupancy", false);
  int c_b = col("B_iso_or_equiv", false);
  int c_model = col("pdbx_PDB_model_num", false);
  if (c_atom < 0)
    c_atom = c_auth_atom;
  if (c_comp < 0)
    c_comp = c_auth_comp;
  if (c_atom < 0 || c_comp < 0 || (c_asym < 0 && c_auth_asym < 0) || (c_seq < 0 && c_auth_seq < 0))
    fail(ErrorKind::Parse, "mmCIF: _atom_site lacks atom/residue/chain identifiers");

  auto value = [](const std::vector<cif::Token>& row, int c) -> const cif::Token* {
    if (c < 0 || cif::is_null(row[c]))
      return nullptr;
    return &row[c];
  };

  StructureBuilder builder;
  for (const auto& row : loop.rows) {
    int line = row.front().line;
    auto bad = [&](const std::string& what) {
      fail(ErrorKind::Parse, "mmCIF line " + std::to_string(line) + ": " + what);
    };
    AtomRecord r;
    const cif::Token* g = value(row, c_group);
    r.hetatm = g && g->text == "HETATM";
    if (const cif::Token* t = value(row, c_model)) {
      if (!detail::parse_int(t->text, r.model))
        bad("bad model number '" + t->text + "'");
    }
    const cif::Token* atom = value(row, c_atom);
    const cif::Token* comp = value(row, c_comp);
    if (!atom || !comp)
      bad("missing atom or residue name");
    r.atom_name = atom->text;
    r.resname = comp->text;
    if (const cif::Token* t = value(row, c_elem))
      r.element = t->text;
    if (const cif::Token* t = value(row, c_alt))
      r.altloc = t->text.empty() ? ' ' : t->text[0];
    const cif::Token* chain = value(row, c_auth_asym);
    if (!chain)
      chain = value(row, c_asym);
    if (!chain)
      bad("missing chain id");
    r.chain = chain->text;
    const cif::Token* seq = value(row, c_auth_seq);
    if (!seq)
      seq = value(row, c_seq);
    if (!seq || !detail::parse_int(seq->text, r.seq_id))
      bad("bad residue number");
    if (const cif::Token* t = value(row, c_ins))
      r.icode = t->text.empty() ? ' ' : t->text[0];
    const cif::Token* x = value(row, c_x);
    const cif::Token* y = value(row, c_y);
    const cif::Token* z = value(row, c_z);
    if (!x || !y || !z || !detail::parse_double(x->text, r.pos.x) ||
        !detail::parse_double(y->text, r.pos.y) || !detail::parse_double(z->text, r.pos.z))
      bad("bad coordinates");
    if (const cif::Token* t = value(row, c_occ))
      if (!detail::parse_double(t->text, r.occupancy))
        bad("bad occupancy '" + t->text + "'");
    if (const cif::Token* t = value(row, c_b))
      if (!detail::parse_double(t->text, r.b_factor))
        bad("bad B-factor '" + t->text + "'");
    builder.add(std::move(r));
  }

  std::optional<double> resolution;
  for (const char* tag : {"_refine.ls_d_res_high", "_reflns.d_resolution_high",
                          "_em_3d_reconstruction.resolution"}) {
    const cif::Token* t = block.item(tag);
    double d;
    if (t && !cif::is_null(*t) && detail::parse_double(t->text, d)) {
      resolution = d;
      break;
    }
  }
  std::optional<std::string> method;
  if (const cif::Token* t = block.item("_exptl.method"); t && !cif::is_null(*t))
    method = t->text;
  else if (auto e = block.loops.find("_exptl"); e != block.loops.end()) {
    int c = e->second.column("_exptl.method");
    if (c >= 0 && !e->second.rows.empty())
      method = e->second.rows.front()[c].text;
  }
  return builder.build(std::move(id), resolution, std::move(method));
}

namespace detail {

inline std::string cif_quote(const std::string& s) {
  if (s.empty())
    return "?";
  bool needs = s.find_first_of(" \t'\"#") != std::string::npos || s[0] == '_' || s[0] == '$' ||
               s[0] == ';' || s == "?" || s == ".";
  if (!needs)
    return s;
  return (s.find('\'') == std::string::npos ? "'" + s + "'" : "\"" + s + "\"");
}

} // namespace detail

inline std::string write_mmcif(const Structure& s) {
  std::ostringstream os;
  char buf[256];
  os << "data_" << (s.id.empty() ? "binderkit" : s.id) << "\n#\n";
  if (!s.id.empty())
    os << "_entry.id " << detail::cif_quote(s.id) << "\n#\n";
  if (s.method)
    os << "_exptl.method " << detail::cif_quote(*s.method) << "\n#\n";
  if (s.resolution) {
    std::snprintf(buf, sizeof buf, "%.2f", *s.resolution);
    os << "_refine.ls_d_res_high " << buf << "\n#\n";
  }
  os << "loop_\n";
  for (const char* tag : {"group_PDB", "id", "type_symbol", "label_atom_id", "label_alt_id",
                          "label_comp_id", "label_asym_id", "label_seq_id", "pdbx_PDB_ins_code",
                          "Cartn_x", "Cartn_y", "Cartn_z", "occupancy", "B_iso_or_equiv",
                          "auth_seq_id", "auth_asym_id", "pdbx_PDB_model_num"})
    os << "_atom_site." << tag << '\n';
  int serial = 1;
  for (const Chain& c : s.chains) {
    for (const Residue& r : c.residues) {
      bool het = r.aa != kTokenUnk && three_letter(r.aa) != r.name;
      for (const Atom& a : r.atoms) {
        std::string icode = r.icode == ' ' ? "?" : std::string(1, r.icode);
        std::snprintf(buf, sizeof buf, "%s %d %s %s . %s %s %d %s %.3f %.3f %.3f %.2f %.2f %d %s 1",
                      het ? "HETATM" : "ATOM", serial, a.element.c_str(),
                      detail::cif_quote(a.name).c_str(), r.name.c_str(),
                      detail::cif_quote(c.id).c_str(), r.index + 1, icode.c_str(), a.pos.x,
                      a.pos.y, a.pos.z, a.resolved ? a.occupancy : 0.0, a.b_factor, r.seq_id,
                      detail::cif_quote(c.id).c_str());
        os << buf << '\n';
        ++serial;
      }
    }
  }
  os << "#\n";
  return os.str();
}

} // namespace binderkit

#endif
