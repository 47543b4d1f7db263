#pragma once

#include "specfor/augment.hpp"
#include "specfor/dataset.hpp"
#include "specfor/error.hpp"
#include "specfor/features.hpp"
#include "specfor/image.hpp"
#include "specfor/matrix.hpp"
#include "specfor/metrics.hpp"
#include "specfor/model.hpp"
#include "specfor/pipeline.hpp"
#include "specfor/rng.hpp"
#include "specfor/spectrum.hpp"
