#pragma once

#include <array>
#include <chrono>
#include <ostream>
#include <string>

#include "errors.hpp"

namespace wavesem {

/// Time-stage routines used for timing and error tagging.
enum class Routine { LaplaceSolve = 0, EvaluateRHS = 1, LaplaceUpdate = 2 };

inline constexpr std::array<Routine, 3> kRoutines = {Routine::LaplaceSolve, Routine::EvaluateRHS,
                                                     Routine::LaplaceUpdate};

inline const char* to_string(Routine r)
{
    switch (r) {
    case Routine::LaplaceSolve:
        return "LaplaceSolve";
    case Routine::EvaluateRHS:
        return "EvaluateRHS";
    case Routine::LaplaceUpdate:
        return "LaplaceUpdate";
    }
    return "?";
}

/// A failure inside one routine of a time stage.
class StageError : public Error {
public:
    StageError(Routine routine, const std::string& what, bool numerical = true)
        : Error(std::string("[") + to_string(routine) + "] " + what), routine_(routine), numerical_(numerical)
    {
    }
    Routine routine() const noexcept { return routine_; }
    bool numerical() const noexcept { return numerical_; }

private:
    Routine routine_;
    bool numerical_;
};

/// Accumulated wall time and call counts per routine.
class RoutineTimers {
public:
    void add(Routine r, double seconds)
    {
        seconds_[index(r)] += seconds;
        ++calls_[index(r)];
    }
    double seconds(Routine r) const { return seconds_[index(r)]; }
    long calls(Routine r) const { return calls_[index(r)]; }
    double total() const { return seconds_[0] + seconds_[1] + seconds_[2]; }
    void reset() { *this = RoutineTimers{}; }

    void merge(const RoutineTimers& o)
    {
        for (std::size_t i = 0; i < 3; ++i) {
            seconds_[i] += o.seconds_[i];
            calls_[i] += o.calls_[i];
        }
    }

    /// routine,calls,seconds,seconds_per_call,share
    void write_csv(std::ostream& os) const
    {
        os << "routine,calls,seconds,seconds_per_call,share\n";
        const double tot = total();
        for (Routine r : kRoutines) {
            const long c = calls(r);
            os << to_string(r) << ',' << c << ',' << seconds(r) << ',' << (c > 0 ? seconds(r) / c : 0.0) << ','
               << (tot > 0.0 ? seconds(r) / tot : 0.0) << '\n';
        }
    }

private:
    static std::size_t index(Routine r) { return static_cast<std::size_t>(r); }
    std::array<double, 3> seconds_{};
    std::array<long, 3> calls_{};
};

/// Adds the scope's wall time to `timers` on exit.
class ScopedTimer {
public:
    ScopedTimer(RoutineTimers& timers, Routine r) : timers_(timers), routine_(r), t0_(std::chrono::steady_clock::now()) {}
    ~ScopedTimer()
    {
        timers_.add(routine_, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count());
    }
    ScopedTimer(const ScopedTimer&) = delete;
    ScopedTimer& operator=(const ScopedTimer&) = delete;

private:
    RoutineTimers& timers_;
    Routine routine_;
    std::chrono::steady_clock::time_point t0_;
};

} // namespace wavesem
