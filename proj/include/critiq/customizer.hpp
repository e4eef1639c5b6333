#pragma once

#include "critiq/domain.hpp"
#include "critiq/gateway.hpp"

namespace critiq {

struct CustomizerConfig {
    // Generated sets are capped to bound debate cost.
    int max_generated = 24;
};

// The fixed expert-written dimension set; constant, compiled in.
DimensionSet expert_dimensions();

// Ask the customizer agent for paper-specific dimensions. Deduplicates by
// normalized question text; throws empty_generation when nothing parseable
// comes back.
DimensionSet generate_dimensions(const PaperDocument& paper, const Gateway& gateway,
                                 const CustomizerConfig& config = {});

// expert -> fixed set; generated -> ask the backend; union -> expert entries
// first, then generated ones that are not normalized-text duplicates.
DimensionSet resolve_dimension_set(DimensionMode mode, const PaperDocument& paper,
                                   const Gateway& gateway, const CustomizerConfig& config = {});

}  // namespace critiq
