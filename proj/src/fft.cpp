#include "bogo/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>
#include <vector>

namespace bogo {

namespace {
std::mutex plan_mutex;
std::map<std::tuple<int, int, int>, fftw_plan> plans;

fftw_plan plan_for(int rank, int n, int sign) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_tuple(rank, n, sign);
    auto it = plans.find(key);
    if (it != plans.end()) return it->second;
    std::size_t total = rank == 2 ? std::size_t(n) * n : std::size_t(n);
    std::vector<std::complex<double>> tmp_in(total), tmp_out(total);
    // FFTW_UNALIGNED lets the plan run on any caller buffer
    int dir = sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD;
    fftw_plan p =
        rank == 2 ? fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex *>(tmp_in.data()),
                                     reinterpret_cast<fftw_complex *>(tmp_out.data()), dir,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED)
                  : fftw_plan_dft_1d(n, reinterpret_cast<fftw_complex *>(tmp_in.data()),
                                     reinterpret_cast<fftw_complex *>(tmp_out.data()), dir,
                                     FFTW_ESTIMATE | FFTW_UNALIGNED);
    plans[key] = p;
    return p;
}

void run_plan(fftw_plan p, std::size_t total, const std::complex<double> *in,
              std::complex<double> *out) {
    // fftw_execute_dft is thread-safe for distinct buffers; in-place needs a copy
    // because the API wants non-const input.
    if (in == out) {
        fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(out),
                         reinterpret_cast<fftw_complex *>(out));
    } else {
        std::vector<std::complex<double>> tmp(in, in + total);
        fftw_execute_dft(p, reinterpret_cast<fftw_complex *>(tmp.data()),
                         reinterpret_cast<fftw_complex *>(out));
    }
}
}  // namespace

void fft2(int n, const std::complex<double> *in, std::complex<double> *out, int sign) {
    run_plan(plan_for(2, n, sign), std::size_t(n) * n, in, out);
}

void fft1(int n, const std::complex<double> *in, std::complex<double> *out, int sign) {
    run_plan(plan_for(1, n, sign), std::size_t(n), in, out);
}

}  // namespace bogo
