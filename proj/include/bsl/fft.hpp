#pragma once

#include <bsl/error.hpp>
#include <bsl/spectral_field.hpp>

#include <fftw3.h>

#include <complex>
#include <memory>
#include <mutex>

namespace bsl {

/// Smallest m >= n of the form 2^a 3^b 5^c.
inline int good_fft_size(int n) {
    for (int m = std::max(n, 1);; ++m) {
        int r = m;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return m;
    }
}

namespace detail {
inline std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}
struct FftwFree {
    void operator()(void* p) const { fftw_free(p); }
};
} // namespace detail

using FftBuffer = std::unique_ptr<cplx[], detail::FftwFree>;

inline FftBuffer make_fft_buffer(std::size_t n) {
    auto* p = static_cast<cplx*>(fftw_malloc(sizeof(cplx) * n));
    require(p != nullptr, ErrorKind::Io, "fftw_malloc failed");
    for (std::size_t i = 0; i < n; ++i) p[i] = cplx{};
    return FftBuffer(p);
}

/// Complex 2D transform pair on an nx × ny array (x-major). Plans are shared per size; execution
/// on caller-owned aligned buffers is thread safe.
class Fft2d {
  public:
    Fft2d(int nx, int ny) : nx_(nx), ny_(ny) {
        require(nx > 0 && ny > 0, ErrorKind::Config, "FFT sizes must be positive");
        auto a = make_fft_buffer(size());
        std::lock_guard lock(detail::fftw_planner_mutex());
        auto* fa = reinterpret_cast<fftw_complex*>(a.get());
        fwd_ = fftw_plan_dft_2d(nx, ny, fa, fa, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(nx, ny, fa, fa, FFTW_BACKWARD, FFTW_ESTIMATE);
        require(fwd_ && bwd_, ErrorKind::Io, "FFTW planning failed");
    }
    ~Fft2d() {
        std::lock_guard lock(detail::fftw_planner_mutex());
        if (fwd_) fftw_destroy_plan(fwd_);
        if (bwd_) fftw_destroy_plan(bwd_);
    }
    Fft2d(const Fft2d&) = delete;
    Fft2d& operator=(const Fft2d&) = delete;

    int nx() const { return nx_; }
    int ny() const { return ny_; }
    std::size_t size() const { return std::size_t(nx_) * std::size_t(ny_); }

    /// In place, unnormalized: Σ f̂ e^{+i(kx+ξy)}.
    void backward(cplx* data) const { fftw_execute_dft(bwd_, as_fftw(data), as_fftw(data)); }
    /// In place, unnormalized: Σ f e^{-i(kx+ξy)}.
    void forward(cplx* data) const { fftw_execute_dft(fwd_, as_fftw(data), as_fftw(data)); }

  private:
    static fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }
    int nx_, ny_;
    fftw_plan fwd_ = nullptr;
    fftw_plan bwd_ = nullptr;
};

/// Padded physical grid for a band-limited SpectralGrid: sizes >= 3K+1, 3J+1 so that
/// quadratic products truncated to the band are alias free.
class BandTransform {
  public:
    explicit BandTransform(const SpectralGrid& g)
        : grid_(g), fft_(good_fft_size(3 * g.K + 1), good_fft_size(3 * g.J + 1)) {}

    const SpectralGrid& grid() const { return grid_; }
    int nx() const { return fft_.nx(); }
    int ny() const { return fft_.ny(); }
    std::size_t size() const { return fft_.size(); }
    FftBuffer buffer() const { return make_fft_buffer(size()); }

    std::size_t slot(int k, int j) const {
        const int ix = (k % nx() + nx()) % nx();
        const int iy = (j % ny() + ny()) % ny();
        return std::size_t(ix) * std::size_t(ny()) + std::size_t(iy);
    }

    /// Physical values of Σ mult(k,j) f̂(k,j) e^{i(kX+ξY)}.
    template <class Mult>
    void to_physical(const cplx* band, Mult&& mult, cplx* phys) const {
        std::fill(phys, phys + size(), cplx{});
        for (int k = -grid_.K; k <= grid_.K; ++k)
            for (int j = -grid_.J; j <= grid_.J; ++j)
                phys[slot(k, j)] = mult(k, j) * band[grid_.index(k, j)];
        fft_.backward(phys);
    }
    void to_physical(const cplx* band, cplx* phys) const {
        to_physical(band, [](int, int) { return cplx(1.0); }, phys);
    }
    /// Band coefficients of a physical array (destroys phys).
    void to_band(cplx* phys, cplx* band) const {
        fft_.forward(phys);
        const double s = 1.0 / double(size());
        for (int k = -grid_.K; k <= grid_.K; ++k)
            for (int j = -grid_.J; j <= grid_.J; ++j) band[grid_.index(k, j)] = phys[slot(k, j)] * s;
    }

  private:
    SpectralGrid grid_;
    Fft2d fft_;
};

} // namespace bsl
