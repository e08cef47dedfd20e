"""Checkpoint container files.

A checkpoint is a zip archive holding

- ``manifest.yaml``: format version, free-form metadata, and the ordered list
  of leaf layers with their kind, hyperparameters and tensor entries
- ``tensors/<k>.ictn``: one file per parameter or buffer, in the binary
  tensor format of :mod:`iclab.core.serialize`
"""
import zipfile

import yaml

from iclab import error
from iclab.core.serialize import tensor_to_bytes, tensor_from_bytes

MANIFEST = "manifest.yaml"
FORMAT_VERSION = 1


def build_manifest(model, metadata=None):
    layers = []
    tensors = []
    for lname, layer in model.named_layers():
        entries = {}
        for group, arrays in (("params", layer.parameters()),
                              ("buffers", layer.buffers())):
            for key, array in arrays.items():
                fname = f"tensors/{len(tensors)}.ictn"
                entries[f"{group}/{key}"] = fname
                tensors.append((fname, array))
        layers.append({"name": lname,
                       "kind": layer.kind,
                       "config": layer.config(),
                       "tensors": entries})
    manifest = {"format_version": FORMAT_VERSION,
                "metadata": dict(metadata or {}),
                "layers": layers}
    return manifest, tensors


def save_checkpoint(model, path, metadata=None):
    """Write every parameter and buffer of ``model`` to ``path``."""
    manifest, tensors = build_manifest(model, metadata)
    with zipfile.ZipFile(path, "w", zipfile.ZIP_DEFLATED) as zf:
        zf.writestr(MANIFEST, yaml.safe_dump(manifest, sort_keys=False))
        for fname, array in tensors:
            zf.writestr(fname, tensor_to_bytes(array))
    return path


def _field(entry, key, where):
    if not isinstance(entry, dict) or key not in entry:
        raise error.FormatError(f"checkpoint {where} has no '{key}' entry")
    return entry[key]


def _read_member(zf, fname):
    try:
        return zf.read(fname)
    except KeyError:
        raise error.FormatError(f"checkpoint is missing member '{fname}'")


def load_checkpoint(model, path):
    """Restore parameters and buffers of ``model`` in place from ``path``.

    Returns
    -------
    dict
        the checkpoint metadata

    Raises
    ------
    FormatError
        if the file is not a checkpoint, the manifest is incomplete, or the
        layer list, a tensor key or a tensor shape does not match ``model``
    """
    try:
        zf = zipfile.ZipFile(path)
    except zipfile.BadZipFile as e:
        raise error.FormatError(f"{path} is not a checkpoint: {e}")
    with zf:
        manifest = yaml.safe_load(_read_member(zf, MANIFEST))
        version = _field(manifest, "format_version", "manifest")
        if version != FORMAT_VERSION:
            raise error.FormatError(
                f"unsupported checkpoint version {version}"
            )
        entries = _field(manifest, "layers", "manifest")
        model_layers = list(model.named_layers())
        if len(model_layers) != len(entries):
            raise error.FormatError(
                f"checkpoint has {len(entries)} layers, model has "
                f"{len(model_layers)}"
            )
        for (lname, layer), entry in zip(model_layers, entries):
            name = _field(entry, "name", "layer entry")
            kind = _field(entry, "kind", f"layer '{name}'")
            if name != lname or kind != layer.kind:
                raise error.FormatError(
                    f"checkpoint layer {name} ({kind}) does not match model "
                    f"layer {lname} ({layer.kind})"
                )
            targets = {f"params/{k}": v for k, v in layer.parameters().items()}
            targets.update(
                {f"buffers/{k}": v for k, v in layer.buffers().items()}
            )
            for key, fname in _field(entry, "tensors",
                                     f"layer '{name}'").items():
                if key not in targets:
                    raise error.FormatError(
                        f"{lname}: unknown tensor '{key}' in checkpoint"
                    )
                array = tensor_from_bytes(_read_member(zf, fname))
                target = targets[key]
                if array.shape != target.shape:
                    raise error.FormatError(
                        f"{lname}/{key}: checkpoint shape {array.shape} != "
                        f"model shape {target.shape}"
                    )
                target[...] = array
        return _field(manifest, "metadata", "manifest")
