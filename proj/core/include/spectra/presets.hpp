#pragma once

#include <string>
#include <vector>

#include "spectra/model.hpp"
#include "spectra/synth.hpp"

namespace spectra {

/// Names accepted by preset() / preset_spec().
std::vector<std::string> preset_names();

/// Parametric channel description of a named benchmark topology. Throws
/// std::invalid_argument for unknown names.
SynthSpec preset_spec(const std::string& name);

/// Materialized scenario for a named benchmark topology:
///   adsl-nearfar-2  2-user near-far ADSL downstream bundle
///   vdsl-up-4       4-user VDSL upstream, lengths {1200,1200,300,300} m
///   vdsl-up-6       6-user VDSL upstream, lengths {1200..300} m
///   vdsl-up-6sym    6-user VDSL upstream with three strong symmetric
///                   300 m crosstalkers
Scenario preset(const std::string& name);

}  // namespace spectra
