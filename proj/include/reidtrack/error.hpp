// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace reidtrack {

// Error codes cover every failure the library reports through exceptions.
// The C API and the CLI map these onto usage-vs-data exit categories.
enum class Errc {
    no_visible_keypoints,
    degenerate_box,
    zero_vector,
    dim_mismatch,
    single_class,
    empty_gallery,
    out_of_order_frame,
    invalid_spec,
    unknown_preset,
    parse_error,
    non_monotonic_frame,
    embedding_dim_mismatch,
    version_mismatch,
    duplicate_label_in_frame,
    frame_range_mismatch,
    bad_config,
    io_error,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    Errc code() const { return code_; }

    // Configuration mistakes are user errors; everything else is bad data.
    bool is_usage() const {
        return code_ == Errc::bad_config || code_ == Errc::unknown_preset;
    }

private:
    Errc code_;
};

const char* errc_name(Errc code);

} // namespace reidtrack
