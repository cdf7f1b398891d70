#include "flowgate/error.hpp"

namespace flowgate {

std::string_view errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::missing_label_column: return "MissingLabelColumn";
    case Errc::row_width_mismatch: return "RowWidthMismatch";
    case Errc::unparseable_number: return "UnparseableNumber";
    case Errc::schema_mismatch: return "SchemaMismatch";
    case Errc::width_mismatch: return "WidthMismatch";
    case Errc::empty_dataset: return "EmptyDataset";
    case Errc::unknown_label: return "UnknownLabel";
    case Errc::class_too_small: return "ClassTooSmall";
    case Errc::k_too_large: return "KTooLarge";
    case Errc::too_few_samples: return "TooFewSamples";
    case Errc::target_below_current: return "TargetBelowCurrent";
    case Errc::target_above_current: return "TargetAboveCurrent";
    case Errc::invalid_plan: return "InvalidPlan";
    case Errc::unmapped_class: return "UnmappedClass";
    case Errc::bad_dimension: return "BadDimension";
    case Errc::shape_mismatch: return "ShapeMismatch";
    case Errc::invalid_config: return "InvalidConfig";
    case Errc::corrupt_model: return "CorruptModel";
    case Errc::missing_sub_model: return "MissingSubModel";
    case Errc::length_mismatch: return "LengthMismatch";
    case Errc::index_out_of_range: return "IndexOutOfRange";
    case Errc::sink_unwritable: return "SinkUnwritable";
    case Errc::io_error: return "IoError";
    }
    return "Unknown";
}

} // namespace flowgate
