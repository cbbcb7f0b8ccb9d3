#pragma once
#include <complex>

namespace bogo {

// 2d complex FFT on an n-by-n slice (row-major, y rows, x columns), backed by
// cached FFTW plans (created once per size under a lock, executed lock-free).
// sign -1: forward (e^{-ik·x}), +1: inverse, both unnormalized as in FFTW.
void fft2(int n, const std::complex<double> *in, std::complex<double> *out, int sign);

// 1d complex FFT, same plan cache and sign convention
void fft1(int n, const std::complex<double> *in, std::complex<double> *out, int sign);

// integer frequency for bin j of an n-point transform
inline int fft_freq(int j, int n) { return j <= n / 2 ? j : j - n; }

}  // namespace bogo
