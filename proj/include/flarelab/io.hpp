#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "flarelab/rtt_map.hpp"

namespace flarelab {

// Schema or syntax problem in an input document. Messages carry a JSON
// pointer ("/graph/edges/2/reverse") or a line/column for syntax errors.
class input_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

constexpr int kSchemaVersion = 1;

// Unknown keys throw in strict mode; in lenient mode they are appended to
// `warnings` (when non-null).
TopRep parse_document(const std::string& text, bool strict = true, std::vector<std::string>* warnings = nullptr);
TopRep load_document(const std::string& path, bool strict = true, std::vector<std::string>* warnings = nullptr);

nlohmann::json serialize(const TopRep& f);
std::string canonical_text(const TopRep& f);
// 64-bit FNV-1a of the canonical text, as 16 hex digits.
std::string fixture_hash(const TopRep& f);

nlohmann::json ids_json(const EdgePath& p);
// Parses a comma or space separated list of signed edge ids.
std::vector<int> parse_id_list(const std::string& s);

}  // namespace flarelab
