#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace eyetap {

/// Session clock unit. All timestamps are integer milliseconds from session start.
using Millis = std::int64_t;

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point&, const Point&) = default;
    Point operator+(Point o) const { return {x + o.x, y + o.y}; }
    Point operator-(Point o) const { return {x - o.x, y - o.y}; }
    Point operator*(double s) const { return {x * s, y * s}; }
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point p) { return std::hypot(p.x, p.y); }
inline double distance(Point a, Point b) { return norm(a - b); }

struct ScreenSpec {
    int width = 1920;
    int height = 1080;

    friend bool operator==(const ScreenSpec&, const ScreenSpec&) = default;

    void validate() const;
    bool contains(Point p) const {
        return p.x >= 0.0 && p.y >= 0.0 && p.x < width && p.y < height;
    }
    /// Clamps into [0, width-1] x [0, height-1].
    Point clamp(Point p) const;
    Point center() const { return {width / 2.0, height / 2.0}; }
};

// Error taxonomy shared by every module.

class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidSpec : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class InvalidState : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class ProtocolError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

}  // namespace eyetap
