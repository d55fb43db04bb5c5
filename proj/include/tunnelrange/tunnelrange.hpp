// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "channel_features.hpp"
#include "cir_processing.hpp"
#include "error.hpp"
#include "feature_selection.hpp"
#include "feature_table.hpp"
#include "io.hpp"
#include "pipeline.hpp"
#include "ranging_model.hpp"
#include "records.hpp"
#include "threshold_tuner.hpp"
#include "tunnel_synth.hpp"
#include "units.hpp"
