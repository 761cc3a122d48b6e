#pragma once

// Umbrella header: the full conversion-and-evaluation toolkit.

#include "edgeflow/canny.hpp"
#include "edgeflow/error.hpp"
#include "edgeflow/flowgraph.hpp"
#include "edgeflow/image.hpp"
#include "edgeflow/image_io.hpp"
#include "edgeflow/mermaid.hpp"
#include "edgeflow/metrics.hpp"
#include "edgeflow/noise.hpp"
#include "edgeflow/pipeline.hpp"
#include "edgeflow/preprocess.hpp"
#include "edgeflow/prompts.hpp"
#include "edgeflow/repair.hpp"
#include "edgeflow/stats.hpp"
#include "edgeflow/vlm.hpp"
