#pragma once

#include <cstdint>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qkgeo/jet.hpp"

namespace qkgeo {

struct DomainError : std::runtime_error {
    DomainError(const std::string& what, Point p) : std::runtime_error(what), point(std::move(p)) {}
    Point point;
};

/// A coordinate chart: dimension, coordinate labels, a pure domain predicate
/// (taking a margin so sampling can stay clear of the boundary), and a box
/// from which sample points are drawn by rejection.
class Chart {
  public:
    using DomainPred = std::function<bool(const Point&, double margin)>;
    using Box = std::vector<std::pair<double, double>>;

    static constexpr double kDefaultMargin = 1e-6;

    Chart() = default;
    Chart(std::vector<std::string> names, DomainPred domain, Box sample_box)
        : names_(std::move(names)), domain_(std::move(domain)), box_(std::move(sample_box)) {
        if (names_.size() < 2) throw std::invalid_argument("chart dimension must be >= 2");
        if (box_.size() != names_.size()) throw std::invalid_argument("sample box dim mismatch");
    }

    int dim() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& coord_names() const { return names_; }
    const Box& sample_box() const { return box_; }

    bool contains(const Point& p, double margin = kDefaultMargin) const {
        if (static_cast<int>(p.size()) != dim()) return false;
        return domain_(p, margin);
    }

    void require(const Point& p, double margin = kDefaultMargin) const {
        if (!contains(p, margin)) {
            std::ostringstream os;
            os << "point outside chart domain: (";
            for (size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
            os << ")";
            throw DomainError(os.str(), p);
        }
    }

    /// Deterministic quasi-random sample: Halton sequence mapped into the box,
    /// rejection-filtered by the domain predicate. The seed offsets the
    /// sequence start so different seeds give different (reproducible) plans.
    std::vector<Point> sample(int count, uint64_t seed) const {
        static const int primes[12] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
        const int d = dim();
        if (d > 12) throw std::invalid_argument("charts of dimension > 12 unsupported");
        std::vector<Point> out;
        out.reserve(size_t(count));
        uint64_t index = 1000 + 7919 * seed;
        const uint64_t max_index = index + 200000ull * uint64_t(count < 1 ? 1 : count);
        while (static_cast<int>(out.size()) < count && index < max_index) {
            Point p(static_cast<size_t>(d), 0.0);
            for (int i = 0; i < d; ++i) {
                const double u = halton(index, primes[i]);
                p[size_t(i)] = box_[size_t(i)].first +
                               u * (box_[size_t(i)].second - box_[size_t(i)].first);
            }
            ++index;
            if (domain_(p, kDefaultMargin)) out.push_back(std::move(p));
        }
        if (static_cast<int>(out.size()) < count)
            throw std::runtime_error("sampling failed: domain predicate rejects the sample box");
        return out;
    }

  private:
    static double halton(uint64_t i, int base) {
        double f = 1.0, r = 0.0;
        while (i > 0) {
            f /= base;
            r += f * double(i % uint64_t(base));
            i /= uint64_t(base);
        }
        return r;
    }

    std::vector<std::string> names_;
    DomainPred domain_;
    Box box_;
};

}  // namespace qkgeo
