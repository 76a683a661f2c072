"""Pixel-space augmentation: RRC, flip, RandAugment, normalization, Random Erasing."""

from .erasing import RandomErasingConfig, random_erasing, sample_erase_box
from .image import (
    ImageBuffer,
    center_crop,
    denormalize,
    eval_resize_size,
    eval_transform,
    normalize,
    resize,
)
from .pipeline import TrainAugmentConfig, augment_batch, augment_sample, augment_stages, eval_batch
from .randaugment import (
    ALL_OPS,
    UNIFORM,
    RandAugmentConfig,
    apply_op,
    map_magnitude,
    op_strength,
    rand_augment,
    sample_magnitude,
)
from .transforms import RrcConfig, horizontal_flip, random_resized_crop, sample_rrc_box
