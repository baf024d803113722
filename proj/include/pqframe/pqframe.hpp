#pragma once

#include "pqframe/errors.hpp"
#include "pqframe/group.hpp"
#include "pqframe/measure.hpp"
#include "pqframe/transform.hpp"
#include "pqframe/bounds.hpp"
#include "pqframe/theorems.hpp"
#include "pqframe/scenario.hpp"
