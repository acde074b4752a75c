// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "hypersindy/trajectory_io.hpp"

#include <initializer_list>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace hypersindy {

// Minimal JSON emitter. nlohmann/json is used for parsing; writing goes
// through this so numbers carry 17 significant digits and the byte stream is
// fully deterministic (fixed key order, fixed formatting).
class JsonWriter {
public:
    explicit JsonWriter(std::ostream& os) : os_(os) {}

    void begin_object() { open('{'); }
    void end_object() { close('}'); }
    void begin_array() { open('['); }
    void end_array() { close(']'); }

    void key(const std::string& name) {
        comma();
        write_string(name);
        os_ << ':';
        just_keyed_ = true;
    }

    void value(const std::string& v) {
        comma();
        write_string(v);
    }
    void value(const char* v) { value(std::string(v)); }
    void value(double v) {
        comma();
        os_ << format_double(v);
    }
    void value(int v) {
        comma();
        os_ << v;
    }
    void value(long long v) {
        comma();
        os_ << v;
    }
    void value(unsigned long long v) {
        comma();
        os_ << v;
    }
    void value(bool v) {
        comma();
        os_ << (v ? "true" : "false");
    }
    void null() {
        comma();
        os_ << "null";
    }

    void numbers(std::span<const double> values) {
        begin_array();
        for (double v : values) value(v);
        end_array();
    }

    // rows x cols matrix as nested lists.
    void matrix(std::span<const double> values, int rows, int cols) {
        begin_array();
        for (int r = 0; r < rows; ++r) {
            begin_array();
            for (int c = 0; c < cols; ++c) {
                value(values[static_cast<std::size_t>(r) * cols + c]);
            }
            end_array();
        }
        end_array();
    }

private:
    void open(char c) {
        comma();
        os_ << c;
        needs_comma_ = false;
    }
    void close(char c) {
        os_ << c;
        needs_comma_ = true;
        just_keyed_ = false;
    }
    void comma() {
        if (needs_comma_ && !just_keyed_) os_ << ',';
        needs_comma_ = true;
        just_keyed_ = false;
    }
    void write_string(const std::string& s) {
        os_ << '"';
        for (char c : s) {
            switch (c) {
            case '"': os_ << "\\\""; break;
            case '\\': os_ << "\\\\"; break;
            case '\n': os_ << "\\n"; break;
            case '\t': os_ << "\\t"; break;
            default: os_ << c;
            }
        }
        os_ << '"';
    }

    std::ostream& os_;
    bool needs_comma_ = false;
    bool just_keyed_ = false;
};

} // namespace hypersindy
