#include "rfam/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rfam {

namespace {

std::atomic<ExecBackend> g_backend{ExecBackend::Parallel};

ExecBackend initial_backend() {
    const char* env = std::getenv("RFAM_SERIAL");
    if (env && env[0] == '1') return ExecBackend::Serial;
    return ExecBackend::Parallel;
}

const bool g_init = [] {
    g_backend.store(initial_backend());
    return true;
}();

// Exceptions may not unwind out of an OpenMP region; capture the first one
// and rethrow on the calling thread.
class ExceptionCollector {
public:
    void capture() {
        std::lock_guard<std::mutex> lock(mutex_);
        if (!first_) first_ = std::current_exception();
    }
    void rethrow() {
        if (first_) std::rethrow_exception(first_);
    }

private:
    std::mutex mutex_;
    std::exception_ptr first_;
};

} // namespace

ExecBackend exec_backend() { return g_backend.load(); }

void set_exec_backend(ExecBackend backend) { g_backend.store(backend); }

int parallel_width() {
#ifdef _OPENMP
    return exec_backend() == ExecBackend::Parallel ? omp_get_max_threads() : 1;
#else
    return 1;
#endif
}

void parallel_for(int n, const std::function<void(int)>& body) {
#ifdef _OPENMP
    if (exec_backend() == ExecBackend::Parallel && n > 1) {
        ExceptionCollector errors;
#pragma omp parallel for schedule(static)
        for (int i = 0; i < n; ++i) {
            try {
                body(i);
            } catch (...) {
                errors.capture();
            }
        }
        errors.rethrow();
        return;
    }
#endif
    for (int i = 0; i < n; ++i) body(i);
}

void parallel_invoke(const std::function<void()>& a, const std::function<void()>& b) {
#ifdef _OPENMP
    if (exec_backend() == ExecBackend::Parallel) {
        ExceptionCollector errors;
#pragma omp parallel sections
        {
#pragma omp section
            {
                try {
                    a();
                } catch (...) {
                    errors.capture();
                }
            }
#pragma omp section
            {
                try {
                    b();
                } catch (...) {
                    errors.capture();
                }
            }
        }
        errors.rethrow();
        return;
    }
#endif
    a();
    b();
}

} // namespace rfam
