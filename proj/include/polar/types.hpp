#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace polar {

// Grid resolution shared by the world, collision sampling and path search.
inline constexpr double kCellSize = 0.25;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

double distance(Vec2 a, Vec2 b);

// Low-level action set executed by the controller.
enum class ActionLow { move_forward, turn_left, turn_right, stop };

std::string_view to_string(ActionLow action);
ActionLow action_from_string(std::string_view name);

// Headings are integer degrees in {0, 30, ..., 330}; 0 points along +y and
// angles grow clockwise, so 90 points along +x.
int normalize_heading(int degrees);
bool is_valid_heading(int degrees);

// Unit direction for a heading multiple of 30, built from exact constants so
// positions are reproducible independent of the math library.
Vec2 heading_direction(int heading);

// Bearing of `to` seen from `from`, in degrees [0, 360) with the heading
// convention above.
double bearing_deg(Vec2 from, Vec2 to);

// Smallest absolute difference between two angles in degrees, in [0, 180].
double angle_diff_deg(double a, double b);

// Lowercase alphanumeric tokens; everything else separates tokens.
std::vector<std::string> word_tokens(std::string_view text);

std::string to_lower(std::string_view text);

}  // namespace polar
