#include "proxysense/label.hpp"

#include <fstream>
#include <string>

#include "proxysense/error.hpp"
#include "text.hpp"

namespace proxysense {

LabelInventory::LabelInventory(std::vector<std::string> names, std::string version)
    : names_(std::move(names)), version_(std::move(version)) {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty() || names_[i].find('|') != std::string::npos)
      throw ValidationError("invalid supersense identifier '" + names_[i] + "'");
    if (!index_.emplace(names_[i], i).second)
      throw ValidationError("duplicate supersense identifier '" + names_[i] + "'");
  }
}

LabelInventory LabelInventory::load(const std::filesystem::path& path, std::string version) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open label inventory " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    auto name = detail::trim(line);
    if (!name.empty()) names.emplace_back(name);
  }
  if (version.empty()) version = path.stem().string();
  return LabelInventory(std::move(names), std::move(version));
}

std::optional<std::size_t> LabelInventory::index_of(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

SupersenseLabel parse_label(std::string_view text, const LabelInventory& inventory) {
  if (text.empty()) throw FormatError("empty supersense label");
  const auto pipe = text.find('|');
  std::string_view scene = text.substr(0, pipe);
  std::string_view function = pipe == std::string_view::npos ? scene : text.substr(pipe + 1);
  if (function.find('|') != std::string_view::npos)
    throw FormatError("label '" + std::string(text) + "' has more than one pipe");
  if (scene.empty() || function.empty()) throw FormatError("label '" + std::string(text) + "' has an empty part");
  for (auto part : {scene, function})
    if (!inventory.contains(part)) throw InventoryError(std::string(part));
  return {std::string(scene), std::string(function)};
}

std::string render_label(const SupersenseLabel& label) {
  if (!label.is_construal()) return label.scene_role;
  return label.scene_role + "|" + label.function;
}

}  // namespace proxysense
