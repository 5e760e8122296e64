// eeatc.hpp — convenience umbrella for the whole toolkit.

#pragma once

#include "eeatc/dataset.hpp"
#include "eeatc/error.hpp"
#include "eeatc/forest.hpp"
#include "eeatc/format.hpp"
#include "eeatc/ingest.hpp"
#include "eeatc/linear.hpp"
#include "eeatc/matrix.hpp"
#include "eeatc/metrics.hpp"
#include "eeatc/nanny.hpp"
#include "eeatc/pipeline.hpp"
#include "eeatc/record.hpp"
#include "eeatc/rng.hpp"
#include "eeatc/serialize.hpp"
#include "eeatc/synth.hpp"
