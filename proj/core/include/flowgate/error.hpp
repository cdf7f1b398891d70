#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace flowgate {

enum class Errc {
    // ingest
    missing_label_column,
    row_width_mismatch,
    unparseable_number,
    schema_mismatch,
    width_mismatch,
    empty_dataset,
    unknown_label,
    class_too_small,
    // resample
    k_too_large,
    too_few_samples,
    target_below_current,
    target_above_current,
    invalid_plan,
    unmapped_class,
    // neuralnet
    bad_dimension,
    shape_mismatch,
    invalid_config,
    corrupt_model,
    // pipelines / eval
    missing_sub_model,
    length_mismatch,
    index_out_of_range,
    sink_unwritable,
    io_error,
};

std::string_view errc_name(Errc code) noexcept;

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

} // namespace flowgate
