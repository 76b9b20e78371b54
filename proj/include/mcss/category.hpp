#pragma once

#include <array>
#include <optional>
#include <string>

namespace mcss {

enum class Category : int { Wall = 0, Floor = 1, Chair = 2, Table = 3, Sofa = 4, Bed = 5 };

inline constexpr int kNumCategories = 6;

inline bool is_layout_category(Category c) { return c == Category::Wall || c == Category::Floor; }

const std::string& category_name(Category c);
std::optional<Category> category_from_name(const std::string& name);

/// Fixed display colors for debug dumps.
std::array<unsigned char, 3> category_color(Category c);

}  // namespace mcss
