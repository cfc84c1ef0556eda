// Format dispatch, file reading and the JSON debug dump.
//
// JSON dump schema (dump-structure):
//   { "id": str, "resolution": num|null, "method": str|null,
//     "chains": [ { "id": str, "role": "design"|"target"|"context",
//                   "sequence": str,
//                   "residues": [ { "index": int, "seq_id": int, "icode": str,
//                                   "name": str, "aa": str,
//                                   "atoms": [ { "name", "element",
//                                                "pos": [x,y,z], "resolved" } ] } ] } ] }

#ifndef BINDERKIT_STRUCTURE_IO_HPP_
#define BINDERKIT_STRUCTURE_IO_HPP_

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "../core/file.hpp"
#include "mmcif.hpp"
#include "pdb.hpp"

namespace binderkit {

enum class StructureFormat { Pdb, Mmcif };

inline Structure parse_structure(std::string_view bytes, StructureFormat format,
                                 std::string id = {}) {
  return format == StructureFormat::Pdb ? parse_pdb(bytes, std::move(id))
                                        : parse_mmcif(bytes, std::move(id));
}

inline StructureFormat detect_format(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return (ext == ".cif" || ext == ".mmcif") ? StructureFormat::Mmcif : StructureFormat::Pdb;
}

inline Structure read_structure(const std::filesystem::path& path) {
  return parse_structure(read_file(path), detect_format(path), path.stem().string());
}

inline nlohmann::ordered_json structure_to_json(const Structure& s) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["id"] = s.id;
  j["resolution"] = s.resolution ? ordered_json(*s.resolution) : ordered_json(nullptr);
  j["method"] = s.method ? ordered_json(*s.method) : ordered_json(nullptr);
  ordered_json chains = ordered_json::array();
  for (const Chain& c : s.chains) {
    ordered_json jc;
    jc["id"] = c.id;
    jc["role"] = role_name(c.role);
    jc["sequence"] = c.sequence();
    ordered_json residues = ordered_json::array();
    for (const Residue& r : c.residues) {
      ordered_json jr;
      jr["index"] = r.index;
      jr["seq_id"] = r.seq_id;
      jr["icode"] = std::string(1, r.icode);
      jr["name"] = r.name;
      jr["aa"] = std::string(1, one_letter(r.aa));
      ordered_json atoms = ordered_json::array();
      for (const Atom& a : r.atoms)
        atoms.push_back({{"name", a.name},
                         {"element", a.element},
                         {"pos", {a.pos.x, a.pos.y, a.pos.z}},
                         {"resolved", a.resolved}});
      jr["atoms"] = std::move(atoms);
      residues.push_back(std::move(jr));
    }
    jc["residues"] = std::move(residues);
    chains.push_back(std::move(jc));
  }
  j["chains"] = std::move(chains);
  return j;
}

} // namespace binderkit

#endif
