#include "atmplace/design_io.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace atmplace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

Json parse_json_text(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ParseError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

const Json& get_field(const Json& obj, const char* key, const std::string& ctx) {
  if (!obj.is_object()) throw ParseError(ctx + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(ctx + "." + key + ": missing required field");
  return *it;
}

double get_number(const Json& obj, const char* key, const std::string& ctx) {
  const Json& v = get_field(obj, key, ctx);
  if (!v.is_number()) throw ParseError(ctx + "." + key + ": expected a number");
  return v.get<double>();
}

int get_int(const Json& obj, const char* key, const std::string& ctx) {
  const Json& v = get_field(obj, key, ctx);
  if (!v.is_number_integer()) throw ParseError(ctx + "." + key + ": expected an integer");
  return v.get<int>();
}

void warn_unknown(const Json& obj, std::initializer_list<const char*> known, const std::string& ctx,
                  std::vector<std::string>* warnings) {
  if (!warnings || !obj.is_object()) return;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool found = false;
    for (const char* k : known) found = found || it.key() == k;
    if (!found) warnings->push_back(ctx + "." + it.key() + ": unknown field ignored");
  }
}

Json design_to_json(const DesignInstance& d) {
  Json j;
  const auto& ip = d.interposer();
  j["interposer"] = {{"width_mm", ip.width},
                     {"height_mm", ip.height},
                     {"grid", ip.grid},
                     {"min_spacing_mm", ip.min_spacing}};
  Json chiplets = Json::array();
  for (const auto& c : d.chiplets()) {
    Json bumps = Json::array();
    for (const auto& b : c.bumps)
      bumps.push_back({{"pin", b.pin_id}, {"x_mm", b.x}, {"y_mm", b.y}, {"clump", b.clump_id}});
    chiplets.push_back({{"id", c.id},
                        {"w_mm", c.width},
                        {"h_mm", c.height},
                        {"t_mm", c.thickness},
                        {"power_w_per_m2", c.power_density},
                        {"bumps", std::move(bumps)}});
  }
  j["chiplets"] = std::move(chiplets);
  Json nets = Json::array();
  for (const auto& e : d.nets())
    nets.push_back({{"id", e.id},
                    {"a", {{"chiplet", e.a.chiplet}, {"pin", e.a.pin}}},
                    {"b", {{"chiplet", e.b.chiplet}, {"pin", e.b.pin}}}});
  j["nets"] = std::move(nets);
  return j;
}

namespace {

PinRef read_pin_ref(const Json& obj, const std::string& ctx, std::vector<std::string>* warnings) {
  warn_unknown(obj, {"chiplet", "pin"}, ctx, warnings);
  return {get_int(obj, "chiplet", ctx), get_int(obj, "pin", ctx)};
}

}  // namespace

DesignInstance design_from_json(const Json& j, std::vector<std::string>* warnings) {
  warn_unknown(j, {"interposer", "chiplets", "nets"}, "design", warnings);
  const Json& ipj = get_field(j, "interposer", "design");
  warn_unknown(ipj, {"width_mm", "height_mm", "grid", "min_spacing_mm"}, "design.interposer",
               warnings);
  InterposerSpec ip;
  ip.width = get_number(ipj, "width_mm", "design.interposer");
  ip.height = get_number(ipj, "height_mm", "design.interposer");
  ip.grid = get_int(ipj, "grid", "design.interposer");
  ip.min_spacing = get_number(ipj, "min_spacing_mm", "design.interposer");

  const Json& cj = get_field(j, "chiplets", "design");
  if (!cj.is_array()) throw ParseError("design.chiplets: expected an array");
  std::vector<ChipletSpec> chiplets;
  for (std::size_t i = 0; i < cj.size(); ++i) {
    const std::string ctx = "design.chiplets[" + std::to_string(i) + "]";
    const Json& c = cj[i];
    warn_unknown(c, {"id", "w_mm", "h_mm", "t_mm", "power_w_per_m2", "bumps"}, ctx, warnings);
    ChipletSpec s;
    s.id = get_int(c, "id", ctx);
    s.width = get_number(c, "w_mm", ctx);
    s.height = get_number(c, "h_mm", ctx);
    s.thickness = get_number(c, "t_mm", ctx);
    s.power_density = get_number(c, "power_w_per_m2", ctx);
    const Json& bj = get_field(c, "bumps", ctx);
    if (!bj.is_array()) throw ParseError(ctx + ".bumps: expected an array");
    for (std::size_t k = 0; k < bj.size(); ++k) {
      const std::string bctx = ctx + ".bumps[" + std::to_string(k) + "]";
      warn_unknown(bj[k], {"pin", "x_mm", "y_mm", "clump"}, bctx, warnings);
      s.bumps.push_back({get_int(bj[k], "pin", bctx), get_number(bj[k], "x_mm", bctx),
                         get_number(bj[k], "y_mm", bctx), get_int(bj[k], "clump", bctx)});
    }
    chiplets.push_back(std::move(s));
  }

  const Json& nj = get_field(j, "nets", "design");
  if (!nj.is_array()) throw ParseError("design.nets: expected an array");
  std::vector<Net> nets;
  for (std::size_t k = 0; k < nj.size(); ++k) {
    const std::string ctx = "design.nets[" + std::to_string(k) + "]";
    const Json& e = nj[k];
    if (e.is_object() && e.contains("pins"))
      throw ParseError(ctx + ": multi-pin nets are not supported (two-pin only)");
    warn_unknown(e, {"id", "a", "b"}, ctx, warnings);
    Net n;
    n.id = get_int(e, "id", ctx);
    n.a = read_pin_ref(get_field(e, "a", ctx), ctx + ".a", warnings);
    n.b = read_pin_ref(get_field(e, "b", ctx), ctx + ".b", warnings);
    nets.push_back(n);
  }
  try {
    return DesignInstance(ip, std::move(chiplets), std::move(nets));
  } catch (const ValidationError& e) {
    throw ParseError(std::string("design: ") + e.what());
  }
}

Json placement_to_json(const Placement& p) {
  Json arr = Json::array();
  for (std::size_t i = 0; i < p.size(); ++i)
    arr.push_back({{"chiplet", static_cast<int>(i)},
                   {"x_mm", p[i].x},
                   {"y_mm", p[i].y},
                   {"theta_deg", p[i].theta}});
  return arr;
}

Placement placement_from_json(const Json& j, std::vector<std::string>* warnings) {
  if (!j.is_array()) throw ParseError("placement: expected an array");
  Placement p(j.size());
  std::vector<bool> seen(j.size(), false);
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string ctx = "placement[" + std::to_string(k) + "]";
    warn_unknown(j[k], {"chiplet", "x_mm", "y_mm", "theta_deg"}, ctx, warnings);
    const int id = get_int(j[k], "chiplet", ctx);
    if (id < 0 || id >= static_cast<int>(j.size()) || seen[id])
      throw ParseError(ctx + ".chiplet: invalid or duplicate id");
    seen[id] = true;
    p[id] = {get_number(j[k], "x_mm", ctx), get_number(j[k], "y_mm", ctx),
             get_number(j[k], "theta_deg", ctx)};
  }
  return p;
}

void save_design(const std::string& path, const DesignInstance& design) {
  write_text(path, dump_json(design_to_json(design)));
}

DesignInstance load_design(const std::string& path, std::vector<std::string>* warnings) {
  return design_from_json(parse_json_text(read_text(path), path), warnings);
}

void save_placement(const std::string& path, const Placement& placement) {
  write_text(path, dump_json(placement_to_json(placement)));
}

Placement load_placement(const std::string& path, std::vector<std::string>* warnings) {
  return placement_from_json(parse_json_text(read_text(path), path), warnings);
}

}  // namespace atmplace
