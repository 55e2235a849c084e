#pragma once

#include <bsl/error.hpp>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

namespace bsl {

using cplx = std::complex<double>;

/// Truncated Fourier lattice: k in [-K, K] (x-period 2π), ξ_j = j·2π/Ly for j in [-J, J].
struct SpectralGrid {
    int K = 0;
    int J = 0;
    double Ly = 2.0 * std::numbers::pi * 8.0;

    int nk() const { return 2 * K + 1; }
    int nj() const { return 2 * J + 1; }
    std::size_t size() const { return static_cast<std::size_t>(nk()) * static_cast<std::size_t>(nj()); }
    double dxi() const { return 2.0 * std::numbers::pi / Ly; }
    double xi(int j) const { return j * dxi(); }

    /// Row-major over (k, j).
    std::size_t index(int k, int j) const {
        return static_cast<std::size_t>(k + K) * static_cast<std::size_t>(nj()) + static_cast<std::size_t>(j + J);
    }
    bool contains(int k, int j) const { return k >= -K && k <= K && j >= -J && j <= J; }

    friend bool operator==(const SpectralGrid& a, const SpectralGrid& b) {
        return a.K == b.K && a.J == b.J && a.Ly == b.Ly;
    }

    void validate() const {
        require(K >= 0 && J >= 0, ErrorKind::Config, "grid: K and J must be nonnegative");
        require(Ly > 0.0 && std::isfinite(Ly), ErrorKind::Config, "grid: Ly must be positive");
    }
};

/// Complex Fourier coefficients of one scalar field on a SpectralGrid.
class SpectralField {
  public:
    SpectralField() = default;
    explicit SpectralField(const SpectralGrid& grid) : grid_(grid), data_(grid.size(), cplx{}) { grid.validate(); }

    const SpectralGrid& grid() const { return grid_; }

    cplx& operator()(int k, int j) { return data_[grid_.index(k, j)]; }
    const cplx& operator()(int k, int j) const { return data_[grid_.index(k, j)]; }

    std::span<cplx> data() { return data_; }
    std::span<const cplx> data() const { return data_; }

    void set_zero() { std::fill(data_.begin(), data_.end(), cplx{}); }

    /// Sets f̂(k,j) and its Hermitian partner f̂(-k,-j) = conj(f̂(k,j)).
    void set_real_mode(int k, int j, cplx value) {
        (*this)(k, j) = value;
        if (k == 0 && j == 0) {
            (*this)(0, 0) = value.real();
        } else {
            (*this)(-k, -j) = std::conj(value);
        }
    }

    /// max |f̂(k,ξ) - conj f̂(-k,-ξ)|
    double hermitian_defect() const {
        double d = 0.0;
        for (int k = -grid_.K; k <= grid_.K; ++k)
            for (int j = -grid_.J; j <= grid_.J; ++j)
                d = std::max(d, std::abs((*this)(k, j) - std::conj((*this)(-k, -j))));
        return d;
    }

    /// Plain ℓ² norm of the coefficient array.
    double l2() const {
        double s = 0.0;
        for (const auto& c : data_) s += std::norm(c);
        return std::sqrt(s);
    }

    bool finite() const {
        for (const auto& c : data_)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

    SpectralField& operator+=(const SpectralField& o) {
        require(o.grid_ == grid_, ErrorKind::Domain, "field grids differ");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    SpectralField& operator-=(const SpectralField& o) {
        require(o.grid_ == grid_, ErrorKind::Domain, "field grids differ");
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    SpectralField& operator*=(cplx s) {
        for (auto& c : data_) c *= s;
        return *this;
    }
    friend SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
    friend SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
    friend SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

  private:
    SpectralGrid grid_{};
    std::vector<cplx> data_;
};

} // namespace bsl
