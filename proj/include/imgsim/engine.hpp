#pragma once

#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "imgsim/time.hpp"

namespace imgsim {

enum class EventKind {
    RequestArrival,
    FlowComplete,
    PhaseComplete,
    RateRecompute,
    PrefetchTrigger,
};

const char* event_kind_name(EventKind k);

struct Event {
    SimTime fire_at = 0;
    std::uint64_t seq = 0;  // tie-break: equal times dequeue in insertion order
    EventKind kind = EventKind::PhaseComplete;
    std::string subject;
    std::function<void()> action;
};

/// Deterministic discrete-event engine. Single logical thread of control;
/// one instance per simulation run.
class Engine {
public:
    SimTime now() const { return clock_; }

    void schedule(SimTime fire_at, EventKind kind, std::string subject,
                  std::function<void()> action) {
        if (fire_at < clock_) {
            throw std::logic_error("schedule_event: fire_at " +
                                   std::to_string(fire_at) + " is before clock " +
                                   std::to_string(clock_));
        }
        queue_.push(Event{fire_at, next_seq_++, kind, std::move(subject),
                          std::move(action)});
        ++enqueued_;
    }

    /// Process events with fire_at <= t_end in order. The clock only advances
    /// to event times; returns the final clock value.
    SimTime run_until(SimTime t_end) {
        while (!queue_.empty() && queue_.top().fire_at <= t_end) {
            step();
        }
        return clock_;
    }

    bool step() {
        if (queue_.empty()) return false;
        Event e = queue_.top();
        queue_.pop();
        clock_ = e.fire_at;
        ++processed_;
        if (observer_) observer_(e);
        e.action();
        return true;
    }

    std::size_t pending() const { return queue_.size(); }
    std::uint64_t enqueued_count() const { return enqueued_; }
    std::uint64_t processed_count() const { return processed_; }

    /// Optional event-log hook, called before each event's action runs.
    void set_observer(std::function<void(const Event&)> obs) {
        observer_ = std::move(obs);
    }

private:
    struct Later {
        bool operator()(const Event& a, const Event& b) const {
            if (a.fire_at != b.fire_at) return a.fire_at > b.fire_at;
            return a.seq > b.seq;
        }
    };

    SimTime clock_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t enqueued_ = 0;
    std::uint64_t processed_ = 0;
    std::priority_queue<Event, std::vector<Event>, Later> queue_;
    std::function<void(const Event&)> observer_;
};

}  // namespace imgsim
