import logging

import pandas as pd
from mesa import batch_run

from minlift.mappings import FAMILIES
from minlift.sweep import FamilySweep

logging.basicConfig(level=logging.INFO)

# coarser grid than the CLI default
parameters = {"family": list(FAMILIES),
              "steps": [4, 6],
              "n_r": 50,
              "n_theta": 128,
              "samples": 20,
              "seed": 0}

# a sweep finishes in a single model step
results = batch_run(FamilySweep,
                    parameters,
                    iterations=1,
                    max_steps=1,
                    data_collection_period=-1,
                    number_processes=None)

pd.DataFrame(results).to_csv("batch_data.csv")
