#include "qpm/lattice.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace qpm {

Site::Site(std::initializer_list<int> coords) {
    if (coords.size() > static_cast<std::size_t>(kMaxDim)) {
        throw std::invalid_argument("site has more coordinates than kMaxDim");
    }
    std::copy(coords.begin(), coords.end(), c.begin());
}

Site Site::axis(int i, int value) {
    Site s;
    s[i] = value;
    return s;
}

Site& Site::operator+=(const Site& o) {
    for (int i = 0; i < kMaxDim; ++i) c[i] += o.c[i];
    return *this;
}

Site& Site::operator-=(const Site& o) {
    for (int i = 0; i < kMaxDim; ++i) c[i] -= o.c[i];
    return *this;
}

Site Site::operator-() const {
    Site s;
    for (int i = 0; i < kMaxDim; ++i) s.c[i] = -c[i];
    return s;
}

int l1_norm(const Site& s) {
    int n = 0;
    for (int v : s.c) n += std::abs(v);
    return n;
}

int linf_norm(const Site& s) {
    int n = 0;
    for (int v : s.c) n = std::max(n, std::abs(v));
    return n;
}

std::string to_string(const Site& s, int dim) {
    std::string out = "(";
    for (int i = 0; i < dim; ++i) {
        if (i) out += ",";
        out += std::to_string(s[i]);
    }
    return out + ")";
}

LatticeBox::LatticeBox(int dim, Site lo, Site hi) : dim_(dim), lo_(lo), hi_(hi) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("box dimension out of range");
    for (int i = dim; i < kMaxDim; ++i) lo_[i] = hi_[i] = 0;
}

std::size_t LatticeBox::size() const {
    std::size_t n = 1;
    for (int i = 0; i < dim_; ++i) {
        if (hi_[i] < lo_[i]) return 0;
        n *= static_cast<std::size_t>(extent(i));
    }
    return n;
}

bool LatticeBox::contains(const Site& s) const {
    for (int i = 0; i < dim_; ++i) {
        if (s[i] < lo_[i] || s[i] > hi_[i]) return false;
    }
    for (int i = dim_; i < kMaxDim; ++i) {
        if (s[i] != 0) return false;
    }
    return true;
}

bool LatticeBox::contains(const LatticeBox& other) const {
    return other.empty() || (contains(other.lo_) && contains(other.hi_));
}

std::size_t LatticeBox::index(const Site& s) const {
    std::size_t idx = 0;
    for (int i = 0; i < dim_; ++i) {
        idx = idx * static_cast<std::size_t>(extent(i)) + static_cast<std::size_t>(s[i] - lo_[i]);
    }
    return idx;
}

Site LatticeBox::site(std::size_t idx) const {
    Site s;
    for (int i = dim_ - 1; i >= 0; --i) {
        const auto e = static_cast<std::size_t>(extent(i));
        s[i] = lo_[i] + static_cast<int>(idx % e);
        idx /= e;
    }
    return s;
}

std::vector<Site> LatticeBox::sites() const {
    std::vector<Site> out;
    out.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) out.push_back(site(i));
    return out;
}

LatticeBox LatticeBox::grown(int margin) const {
    Site lo = lo_, hi = hi_;
    for (int i = 0; i < dim_; ++i) {
        lo[i] -= margin;
        hi[i] += margin;
    }
    return {dim_, lo, hi};
}

bool LatticeBox::intersects(const LatticeBox& other) const {
    return !intersection(other).empty();
}

LatticeBox LatticeBox::intersection(const LatticeBox& other) const {
    Site lo, hi;
    for (int i = 0; i < dim_; ++i) {
        lo[i] = std::max(lo_[i], other.lo_[i]);
        hi[i] = std::min(hi_[i], other.hi_[i]);
    }
    return {dim_, lo, hi};
}

int LatticeBox::depth(const Site& s) const {
    if (!contains(s)) return 0;
    int d = std::numeric_limits<int>::max();
    for (int i = 0; i < dim_; ++i) {
        d = std::min({d, s[i] - lo_[i] + 1, hi_[i] - s[i] + 1});
    }
    return d;
}

LatticeBox bounding_box(std::span<const Site> sites, int dim) {
    if (sites.empty()) throw std::invalid_argument("bounding box of an empty set");
    Site lo = sites.front(), hi = sites.front();
    for (const auto& s : sites) {
        for (int i = 0; i < dim; ++i) {
            lo[i] = std::min(lo[i], s[i]);
            hi[i] = std::max(hi[i], s[i]);
        }
    }
    return {dim, lo, hi};
}

int distance_to_set(const Site& s, std::span<const Site> set) {
    int best = std::numeric_limits<int>::max();
    for (const auto& m : set) best = std::min(best, l1_norm(s - m));
    return best;
}

}  // namespace qpm
