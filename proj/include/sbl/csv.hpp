#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "sbl/scenario.hpp"
#include "sbl/types.hpp"

namespace sbl {

/// Shortest decimal form with 17 significant digits, enough to reproduce the
/// exact double on read-back.
inline std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/**
 * Minimal CSV emitter: header row then data rows, fields joined by commas,
 * one record per line. Cell values never contain commas or quotes here, so
 * no escaping is needed. Failures throw IoError with the path.
 */
class CsvWriter {
  public:
    explicit CsvWriter(const std::filesystem::path& path) : path_(path.string()), out_(path) {
        if (!out_) {
            throw IoError("cannot open for writing: " + path_);
        }
    }

    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i > 0) {
                out_ << ',';
            }
            out_ << cells[i];
        }
        out_ << '\n';
        if (!out_) {
            throw IoError("write failed: " + path_);
        }
    }

    void close() {
        out_.close();
        if (out_.fail()) {
            throw IoError("close failed: " + path_);
        }
    }

  private:
    std::string path_;
    std::ofstream out_;
};

/// Column labels for a multi-channel signal: bare name when there is a
/// single channel, name_0, name_1, ... otherwise.
inline std::vector<std::string> channel_labels(const std::string& name, Index channels) {
    std::vector<std::string> labels;
    if (channels == 1) {
        labels.push_back(name);
    } else {
        for (Index c = 0; c < channels; ++c) {
            labels.push_back(name + "_" + std::to_string(c));
        }
    }
    return labels;
}

}  // namespace sbl
