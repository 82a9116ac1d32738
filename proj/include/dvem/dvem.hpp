#pragma once

// Umbrella header for the geo-distinctive visual element matching engine.

#include "dvem/baselines.hpp"
#include "dvem/dataset.hpp"
#include "dvem/element_cloud.hpp"
#include "dvem/evaluation.hpp"
#include "dvem/geo_distinctiveness.hpp"
#include "dvem/geodesy.hpp"
#include "dvem/io.hpp"
#include "dvem/location_extraction.hpp"
#include "dvem/location_matching.hpp"
#include "dvem/oracle.hpp"
#include "dvem/pipeline.hpp"
#include "dvem/region_grid.hpp"
#include "dvem/synth.hpp"
#include "dvem/types.hpp"
#include "dvem/validation.hpp"
