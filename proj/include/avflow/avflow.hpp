#pragma once

#include "avflow/analysis.hpp"
#include "avflow/arz.hpp"
#include "avflow/constitutive.hpp"
#include "avflow/csv.hpp"
#include "avflow/errors.hpp"
#include "avflow/nm1_staggered.hpp"
#include "avflow/nm2_lines.hpp"
#include "avflow/numerics.hpp"
#include "avflow/particle.hpp"
#include "avflow/profile.hpp"
#include "avflow/reduced.hpp"
#include "avflow/run_io.hpp"
#include "avflow/runner.hpp"
#include "avflow/scenario.hpp"
#include "avflow/stepper.hpp"
