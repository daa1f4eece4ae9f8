/** Caption templates used to build concept and class directions. */

export const CAPTION_TEMPLATES: readonly string[] = [
  'a bad photo of a {}.',
  'a photo of many {}.',
  'a photo of the hard to see {}.',
  'a low resolution photo of the {}.',
  'a rendering of a {}.',
  'a bad photo of the {}.',
  'a cropped photo of the {}.',
  'a photo of a hard to see {}.',
  'a bright photo of a {}.',
  'a photo of a clean {}.',
  'a photo of a dirty {}.',
  'a dark photo of the {}.',
  'a drawing of a {}.',
  'a photo of my {}.',
  'a photo of the cool {}.',
  'a close-up photo of a {}.',
  'a black and white photo of the {}.',
  'a painting of the {}.',
  'a painting of a {}.',
  'a pixelated photo of the {}.',
  'a bright photo of the {}.',
  'a cropped photo of a {}.',
  'a photo of the dirty {}.',
  'a jpeg corrupted photo of a {}.',
  'a blurry photo of the {}.',
  'a photo of the {}.',
  'a good photo of the {}.',
  'a rendering of the {}.',
  'a {} in an image.',
  'a photo of one {}.',
  'a doodle of a {}.',
  'a close-up photo of the {}.',
  'a photo of a {}.',
  'the {} in an image.',
  'a sketch of a {}.',
  'a doodle of the {}.',
  'a low resolution photo of a {}.',
  'a photo of the clean {}.',
  'a photo of a large {}.',
  'a photo of a nice {}.',
  'a photo of a weird {}.',
  'a blurry photo of a {}.',
  'a cartoon {}.',
  'art of a {}.',
  'a sketch of the {}.',
  'a pixelated photo of a {}.',
  'a jpeg corrupted photo of the {}.',
  'a good photo of a {}.',
  'a photo of the nice {}.',
  'a photo of the small {}.',
  'a photo of the weird {}.',
  'the cartoon {}.',
  'art of the {}.',
  'a drawing of the {}.',
  'a photo of the large {}.',
  'a black and white photo of a {}.',
  'a dark photo of a {}.',
  'a photo of a cool {}.',
  'a photo of a small {}.',
  'a photo containing a {}.',
  'a photo containing the {}.',
  'a photo with a {}.',
  'a photo with the {}.',
  'a photo containing a {} object.',
  'a photo containing the {} object.',
  'a photo with a {} object.',
  'a photo with the {} object.',
  'a photo of a {} object.',
  'a photo of the {} object.',
];

export function expandCaptions(name: string): string[] {
  return CAPTION_TEMPLATES.map((t) => t.replace('{}', name));
}

