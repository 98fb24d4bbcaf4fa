#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace qpm {

inline constexpr int kMaxDim = 3;

// Integer lattice point. Coordinates past the working dimension stay zero,
// so comparisons and hashing are dimension-agnostic.
struct Site {
    std::array<int, kMaxDim> c{};

    Site() = default;
    Site(std::initializer_list<int> coords);
    static Site axis(int i, int value = 1);

    int& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
    int operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

    Site& operator+=(const Site& o);
    Site& operator-=(const Site& o);
    friend Site operator+(Site a, const Site& b) { return a += b; }
    friend Site operator-(Site a, const Site& b) { return a -= b; }
    Site operator-() const;

    auto operator<=>(const Site&) const = default;
};

int l1_norm(const Site& s);
int linf_norm(const Site& s);
std::string to_string(const Site& s, int dim);

// Axis-aligned box [lo, hi] (inclusive) in Z^d, flattened in row-major order
// with the first coordinate slowest.
class LatticeBox {
public:
    LatticeBox() = default;
    LatticeBox(int dim, Site lo, Site hi);
    static LatticeBox interval(int lo, int hi) { return {1, Site{lo}, Site{hi}}; }

    int dim() const { return dim_; }
    const Site& lo() const { return lo_; }
    const Site& hi() const { return hi_; }
    int extent(int axis) const { return hi_[axis] - lo_[axis] + 1; }
    std::size_t size() const;
    bool empty() const { return size() == 0; }

    bool contains(const Site& s) const;
    bool contains(const LatticeBox& other) const;
    std::size_t index(const Site& s) const;
    Site site(std::size_t idx) const;
    std::vector<Site> sites() const;

    LatticeBox shifted(const Site& by) const { return {dim_, lo_ + by, hi_ + by}; }
    LatticeBox grown(int margin) const;
    bool intersects(const LatticeBox& other) const;
    LatticeBox intersection(const LatticeBox& other) const;

    // Graph distance from s to the complement of the box (0 when s is outside).
    int depth(const Site& s) const;

    bool operator==(const LatticeBox&) const = default;

private:
    int dim_ = 1;
    Site lo_{}, hi_{};
};

LatticeBox bounding_box(std::span<const Site> sites, int dim);

// l1 distance from s to the nearest member of the set.
int distance_to_set(const Site& s, std::span<const Site> set);

}  // namespace qpm
