#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "proxysense/error.hpp"

namespace proxysense {

// Ordered, versioned list of supersense identifiers. The order fixes the
// layout of every probability vector in a deployment.
class LabelInventory {
 public:
  LabelInventory() = default;
  LabelInventory(std::vector<std::string> names, std::string version);

  // One identifier per line; blank lines are skipped. The version defaults
  // to the file stem (e.g. "snacs-v2.5").
  static LabelInventory load(const std::filesystem::path& path, std::string version = {});

  std::size_t size() const { return names_.size(); }
  bool empty() const { return names_.empty(); }
  const std::vector<std::string>& names() const { return names_; }
  const std::string& name(std::size_t index) const { return names_.at(index); }
  const std::string& version() const { return version_; }

  std::optional<std::size_t> index_of(std::string_view name) const;
  bool contains(std::string_view name) const { return index_of(name).has_value(); }

  bool operator==(const LabelInventory& other) const {
    return names_ == other.names_ && version_ == other.version_;
  }

 private:
  std::vector<std::string> names_;
  std::string version_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Scene role and function of one adposition token. When both coincide the
// label is written as the single name, otherwise as "scene|function".
struct SupersenseLabel {
  std::string scene_role;
  std::string function;

  static SupersenseLabel single(std::string name) { return {name, std::move(name)}; }

  bool is_construal() const { return scene_role != function; }

  auto operator<=>(const SupersenseLabel&) const = default;
};

// Throws FormatError for empty parts or more than one pipe, and
// InventoryError naming the first identifier missing from the inventory.
SupersenseLabel parse_label(std::string_view text, const LabelInventory& inventory);

std::string render_label(const SupersenseLabel& label);

}  // namespace proxysense
