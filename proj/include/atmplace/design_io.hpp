#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "atmplace/core.hpp"

namespace atmplace {

using Json = nlohmann::ordered_json;

Json design_to_json(const DesignInstance& design);
// Unknown keys are reported through `warnings` (when non-null) and otherwise ignored.
DesignInstance design_from_json(const Json& j, std::vector<std::string>* warnings = nullptr);

Json placement_to_json(const Placement& placement);
Placement placement_from_json(const Json& j, std::vector<std::string>* warnings = nullptr);

void save_design(const std::string& path, const DesignInstance& design);
DesignInstance load_design(const std::string& path, std::vector<std::string>* warnings = nullptr);
void save_placement(const std::string& path, const Placement& placement);
Placement load_placement(const std::string& path, std::vector<std::string>* warnings = nullptr);

// Text helpers shared by the tools.
std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);
Json parse_json_text(const std::string& text, const std::string& source);
std::string dump_json(const Json& j);

// Typed field access that names the offending path on failure.
double get_number(const Json& obj, const char* key, const std::string& ctx);
int get_int(const Json& obj, const char* key, const std::string& ctx);
const Json& get_field(const Json& obj, const char* key, const std::string& ctx);
void warn_unknown(const Json& obj, std::initializer_list<const char*> known, const std::string& ctx,
                  std::vector<std::string>* warnings);

}  // namespace atmplace
