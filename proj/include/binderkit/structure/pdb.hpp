// Fixed-column PDB reader and writer.

#ifndef BINDERKIT_STRUCTURE_PDB_HPP_
#define BINDERKIT_STRUCTURE_PDB_HPP_

#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>

#include "builder.hpp"

namespace binderkit {

namespace detail {

inline std::string_view column(std::string_view line, std::size_t first, std::size_t last) {
  // 1-based inclusive columns, clipped to the line length.
  if (line.size() < first)
    return {};
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

[[noreturn]] inline void pdb_error(int line_no, std::string_view line, const std::string& what) {
  fail(ErrorKind::Parse, "PDB line " + std::to_string(line_no) + ": " + what + " in '" +
                             std::string(line) + "'");
}

} // namespace detail

// `id` is a fallback used when the file carries no HEADER id code.
inline Structure parse_pdb(std::string_view text, std::string id = {}) {
  StructureBuilder builder;
  std::optional<double> resolution;
  std::optional<std::string> method;
  int model = 1;
  bool in_model = false;
  int line_no = 0;

  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos)
      end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);

    std::string_view rec = detail::trim(detail::column(line, 1, 6));
    if (rec == "ATOM" || rec == "HETATM") {
      if (line.size() < 54)
        detail::pdb_error(line_no, line, "truncated coordinate record");
      AtomRecord r;
      r.hetatm = rec == "HETATM";
      r.model = model;
      r.atom_name = std::string(detail::trim(detail::column(line, 13, 16)));
      r.altloc = line[16];
      r.resname = std::string(detail::trim(detail::column(line, 18, 20)));
      r.chain = std::string(detail::trim(detail::column(line, 22, 22)));
      if (!detail::parse_int(detail::column(line, 23, 26), r.seq_id))
        detail::pdb_error(line_no, line, "bad residue number");
      r.icode = line.size() > 26 ? line[26] : ' ';
      if (!detail::parse_double(detail::column(line, 31, 38), r.pos.x) ||
          !detail::parse_double(detail::column(line, 39, 46), r.pos.y) ||
          !detail::parse_double(detail::column(line, 47, 54), r.pos.z))
        detail::pdb_error(line_no, line, "bad coordinates");
      std::string_view occ = detail::trim(detail::column(line, 55, 60));
      if (!occ.empty() && !detail::parse_double(occ, r.occupancy))
        detail::pdb_error(line_no, line, "bad occupancy");
      std::string_view bf = detail::trim(detail::column(line, 61, 66));
      if (!bf.empty() && !detail::parse_double(bf, r.b_factor))
        detail::pdb_error(line_no, line, "bad temperature factor");
      r.element = std::string(detail::trim(detail::column(line, 77, 78)));
      if (r.atom_name.empty())
        detail::pdb_error(line_no, line, "empty atom name");
      builder.add(std::move(r));
    } else if (rec == "MODEL") {
      if (!detail::parse_int(detail::column(line, 11, 14), model))
        model = in_model ? model + 1 : 1;
      in_model = true;
    } else if (rec == "ENDMDL") {
      in_model = false;
    } else if (rec == "HEADER") {
      std::string_view code = detail::trim(detail::column(line, 63, 66));
      if (!code.empty())
        id = std::string(code);
    } else if (rec == "EXPDTA") {
      method = std::string(detail::trim(detail::column(line, 11, 80)));
    } else if (rec == "REMARK" && detail::trim(detail::column(line, 8, 10)) == "2") {
      std::string_view rest = detail::column(line, 11, 80);
      auto pos = rest.find("RESOLUTION.");
      if (pos != std::string_view::npos) {
        std::string_view tail = detail::trim(rest.substr(pos + 11));
        auto sp = tail.find(' ');
        double d;
        if (detail::parse_double(tail.substr(0, sp), d))
          resolution = d;
      }
    }
  }
  return builder.build(std::move(id), resolution, std::move(method));
}

inline std::string write_pdb(const Structure& s) {
  std::ostringstream os;
  char buf[128];
  if (!s.id.empty()) {
    std::snprintf(buf, sizeof buf, "HEADER    %-40s%9s   %-4.4s", "PROTEIN", "", s.id.c_str());
    os << buf << '\n';
  }
  if (s.method)
    os << "EXPDTA    " << *s.method << '\n';
  if (s.resolution) {
    std::snprintf(buf, sizeof buf, "REMARK   2 RESOLUTION.    %.2f ANGSTROMS.", *s.resolution);
    os << buf << '\n';
  }
  int serial = 1;
  for (const Chain& c : s.chains) {
    for (const Residue& r : c.residues) {
      bool het = r.aa == kTokenUnk ? false : three_letter(r.aa) != r.name;
      for (const Atom& a : r.atoms) {
        // Four-character names start in column 13, shorter ones in column 14.
        std::string name = a.name.size() >= 4 ? a.name : " " + a.name;
        std::snprintf(buf, sizeof buf,
                      "%-6s%5d %-4.4s %3.3s %1.1s%4d%c   %8.3f%8.3f%8.3f%6.2f%6.2f          %2.2s",
                      het ? "HETATM" : "ATOM", serial % 100000, name.c_str(), r.name.c_str(),
                      c.id.c_str(), r.seq_id, r.icode, a.pos.x, a.pos.y, a.pos.z,
                      a.resolved ? a.occupancy : 0.0, a.b_factor, a.element.c_str());
        os << buf << '\n';
        ++serial;
      }
    }
    os << "TER\n";
  }
  os << "END\n";
  return os.str();
}

} // namespace binderkit

#endif
