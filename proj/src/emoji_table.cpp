#include "gifrank/textprep.hpp"

namespace gifrank {

// Same entries as data/emoji_lexicon.tsv.
const std::vector<std::pair<std::string, std::string>>& builtin_emoji_entries() {
  static const std::vector<std::pair<std::string, std::string>> entries = {
      {"\U0001F602", ":face_with_tears_of_joy:"},
      {"\U0001F923", ":rolling_on_the_floor_laughing:"},
      {"\U0001F600", ":grinning_face:"},
      {"\U0001F603", ":grinning_face_with_big_eyes:"},
      {"\U0001F604", ":grinning_face_with_smiling_eyes:"},
      {"\U0001F601", ":beaming_face_with_smiling_eyes:"},
      {"\U0001F606", ":grinning_squinting_face:"},
      {"\U0001F605", ":grinning_face_with_sweat:"},
      {"\U0001F642", ":slightly_smiling_face:"},
      {"\U0001F643", ":upside-down_face:"},
      {"\U0001F609", ":winking_face:"},
      {"\U0001F60A", ":smiling_face_with_smiling_eyes:"},
      {"\U0001F607", ":smiling_face_with_halo:"},
      {"\U0001F970", ":smiling_face_with_hearts:"},
      {"\U0001F60D", ":smiling_face_with_heart-eyes:"},
      {"\U0001F929", ":star-struck:"},
      {"\U0001F618", ":face_blowing_a_kiss:"},
      {"\U0001F617", ":kissing_face:"},
      {"\U0001F61A", ":kissing_face_with_closed_eyes:"},
      {"\U0001F60B", ":face_savoring_food:"},
      {"\U0001F61B", ":face_with_tongue:"},
      {"\U0001F61C", ":winking_face_with_tongue:"},
      {"\U0001F92A", ":zany_face:"},
      {"\U0001F61D", ":squinting_face_with_tongue:"},
      {"\U0001F911", ":money-mouth_face:"},
      {"\U0001F917", ":hugging_face:"},
      {"\U0001F92D", ":face_with_hand_over_mouth:"},
      {"\U0001F92B", ":shushing_face:"},
      {"\U0001F914", ":thinking_face:"},
      {"\U0001F910", ":zipper-mouth_face:"},
      {"\U0001F928", ":face_with_raised_eyebrow:"},
      {"\U0001F610", ":neutral_face:"},
      {"\U0001F611", ":expressionless_face:"},
      {"\U0001F636", ":face_without_mouth:"},
      {"\U0001F60F", ":smirking_face:"},
      {"\U0001F612", ":unamused_face:"},
      {"\U0001F644", ":face_with_rolling_eyes:"},
      {"\U0001F62C", ":grimacing_face:"},
      {"\U0001F925", ":lying_face:"},
      {"\U0001F60C", ":relieved_face:"},
      {"\U0001F614", ":pensive_face:"},
      {"\U0001F62A", ":sleepy_face:"},
      {"\U0001F924", ":drooling_face:"},
      {"\U0001F634", ":sleeping_face:"},
      {"\U0001F637", ":face_with_medical_mask:"},
      {"\U0001F912", ":face_with_thermometer:"},
      {"\U0001F922", ":nauseated_face:"},
      {"\U0001F92E", ":face_vomiting:"},
      {"\U0001F927", ":sneezing_face:"},
      {"\U0001F975", ":hot_face:"},
      {"\U0001F976", ":cold_face:"},
      {"\U0001F974", ":woozy_face:"},
      {"\U0001F635", ":dizzy_face:"},
      {"\U0001F92F", ":exploding_head:"},
      {"\U0001F920", ":cowboy_hat_face:"},
      {"\U0001F973", ":partying_face:"},
      {"\U0001F60E", ":smiling_face_with_sunglasses:"},
      {"\U0001F913", ":nerd_face:"},
      {"\U0001F615", ":confused_face:"},
      {"\U0001F61F", ":worried_face:"},
      {"\U0001F641", ":slightly_frowning_face:"},
      {"\U00002639\U0000FE0F", ":frowning_face:"},
      {"\U0001F62E", ":face_with_open_mouth:"},
      {"\U0001F62F", ":hushed_face:"},
      {"\U0001F632", ":astonished_face:"},
      {"\U0001F633", ":flushed_face:"},
      {"\U0001F97A", ":pleading_face:"},
      {"\U0001F626", ":frowning_face_with_open_mouth:"},
      {"\U0001F627", ":anguished_face:"},
      {"\U0001F628", ":fearful_face:"},
      {"\U0001F630", ":anxious_face_with_sweat:"},
      {"\U0001F625", ":sad_but_relieved_face:"},
      {"\U0001F622", ":crying_face:"},
      {"\U0001F62D", ":loudly_crying_face:"},
      {"\U0001F631", ":face_screaming_in_fear:"},
      {"\U0001F616", ":confounded_face:"},
      {"\U0001F623", ":persevering_face:"},
      {"\U0001F61E", ":disappointed_face:"},
      {"\U0001F613", ":downcast_face_with_sweat:"},
      {"\U0001F629", ":weary_face:"},
      {"\U0001F62B", ":tired_face:"},
      {"\U0001F971", ":yawning_face:"},
      {"\U0001F624", ":face_with_steam_from_nose:"},
      {"\U0001F621", ":pouting_face:"},
      {"\U0001F620", ":angry_face:"},
      {"\U0001F92C", ":face_with_symbols_on_mouth:"},
      {"\U0001F608", ":smiling_face_with_horns:"},
      {"\U0001F47F", ":angry_face_with_horns:"},
      {"\U0001F480", ":skull:"},
      {"\U0001F4A9", ":pile_of_poo:"},
      {"\U0001F921", ":clown_face:"},
      {"\U0001F47B", ":ghost:"},
      {"\U0001F47D", ":alien:"},
      {"\U0001F916", ":robot:"},
      {"\U0001F648", ":see-no-evil_monkey:"},
      {"\U0001F649", ":hear-no-evil_monkey:"},
      {"\U0001F64A", ":speak-no-evil_monkey:"},
      {"\U0001F48B", ":kiss_mark:"},
      {"\U0001F48C", ":love_letter:"},
      {"\U0001F498", ":heart_with_arrow:"},
      {"\U0001F49D", ":heart_with_ribbon:"},
      {"\U0001F496", ":sparkling_heart:"},
      {"\U0001F497", ":growing_heart:"},
      {"\U0001F493", ":beating_heart:"},
      {"\U0001F49E", ":revolving_hearts:"},
      {"\U0001F495", ":two_hearts:"},
      {"\U0001F494", ":broken_heart:"},
      {"\U00002764\U0000FE0F", ":red_heart:"},
      {"\U00002764", ":red_heart:"},
      {"\U0001F9E1", ":orange_heart:"},
      {"\U0001F49B", ":yellow_heart:"},
      {"\U0001F49A", ":green_heart:"},
      {"\U0001F499", ":blue_heart:"},
      {"\U0001F49C", ":purple_heart:"},
      {"\U0001F5A4", ":black_heart:"},
      {"\U0001F4AF", ":hundred_points:"},
      {"\U0001F4A2", ":anger_symbol:"},
      {"\U0001F4A5", ":collision:"},
      {"\U0001F4AB", ":dizzy:"},
      {"\U0001F4A6", ":sweat_droplets:"},
      {"\U0001F4A8", ":dashing_away:"},
      {"\U0001F4AC", ":speech_balloon:"},
      {"\U0001F4A4", ":zzz:"},
      {"\U0001F44B", ":waving_hand:"},
      {"\U0000270B", ":raised_hand:"},
      {"\U0001F44C", ":ok_hand:"},
      {"\U0000270C\U0000FE0F", ":victory_hand:"},
      {"\U0001F91E", ":crossed_fingers:"},
      {"\U0001F91F", ":love-you_gesture:"},
      {"\U0001F918", ":sign_of_the_horns:"},
      {"\U0001F919", ":call_me_hand:"},
      {"\U0001F448", ":backhand_index_pointing_left:"},
      {"\U0001F449", ":backhand_index_pointing_right:"},
      {"\U0001F446", ":backhand_index_pointing_up:"},
      {"\U0001F447", ":backhand_index_pointing_down:"},
      {"\U0001F44D", ":thumbs_up:"},
      {"\U0001F44E", ":thumbs_down:"},
      {"\U0000270A", ":raised_fist:"},
      {"\U0001F44A", ":oncoming_fist:"},
      {"\U0001F44F", ":clapping_hands:"},
      {"\U0001F64C", ":raising_hands:"},
      {"\U0001F450", ":open_hands:"},
      {"\U0001F932", ":palms_up_together:"},
      {"\U0001F91D", ":handshake:"},
      {"\U0001F64F", ":folded_hands:"},
      {"\U0001F4AA", ":flexed_biceps:"},
      {"\U0001F440", ":eyes:"},
      {"\U0001F937", ":person_shrugging:"},
      {"\U0001F926", ":person_facepalming:"},
      {"\U0001F483", ":woman_dancing:"},
      {"\U0001F57A", ":man_dancing:"},
      {"\U0001F389", ":party_popper:"},
      {"\U0001F38A", ":confetti_ball:"},
      {"\U0001F381", ":wrapped_gift:"},
      {"\U0001F382", ":birthday_cake:"},
      {"\U0001F37F", ":popcorn:"},
      {"\U0001F37B", ":clinking_beer_mugs:"},
      {"\U0001F942", ":clinking_glasses:"},
      {"\U00002615", ":hot_beverage:"},
      {"\U0001F525", ":fire:"},
      {"\U00002728", ":sparkles:"},
      {"\U00002B50", ":star:"},
      {"\U0001F31F", ":glowing_star:"},
      {"\U00002600\U0000FE0F", ":sun:"},
      {"\U0001F308", ":rainbow:"},
      {"\U000026A1", ":high_voltage:"},
      {"\U00002744\U0000FE0F", ":snowflake:"},
      {"\U0001F3C6", ":trophy:"},
      {"\U0001F947", ":1st_place_medal:"},
      {"\U000026BD", ":soccer_ball:"},
      {"\U0001F3C0", ":basketball:"},
      {"\U0001F3B5", ":musical_note:"},
      {"\U0001F3B6", ":musical_notes:"},
      {"\U0001F3A4", ":microphone:"},
      {"\U0001F4F8", ":camera_with_flash:"},
      {"\U0001F4B0", ":money_bag:"},
      {"\U0001F4B8", ":money_with_wings:"},
      {"\U0001F680", ":rocket:"},
      {"\U0001F4AD", ":thought_balloon:"},
      {"\U00002705", ":check_mark_button:"},
      {"\U0000274C", ":cross_mark:"},
      {"\U00002757", ":exclamation_mark:"},
      {"\U00002753", ":question_mark:"},
      {"\U0000203C\U0000FE0F", ":double_exclamation_mark:"},
      {"\U0001F6A8", ":police_car_light:"},
      {"\U0001F436", ":dog_face:"},
      {"\U0001F431", ":cat_face:"},
      {"\U0001F98B", ":butterfly:"},
      {"\U0001F40D", ":snake:"},
      {"\U0001F984", ":unicorn:"},
      {"\U0001F339", ":rose:"},
      {"\U0001F33B", ":sunflower:"},
      {"\U0001F338", ":cherry_blossom:"},
      {"\U0001F355", ":pizza:"},
      {"\U0001F354", ":hamburger:"},
      {"\U0001F377", ":wine_glass:"},
      {"\U0001F44F\U0001F3FB", ":clapping_hands_light_skin_tone:"},
      {"\U0001F44D\U0001F3FB", ":thumbs_up_light_skin_tone:"},
      {"\U0001F44D\U0001F3FD", ":thumbs_up_medium_skin_tone:"},
      {"\U0001F44D\U0001F3FF", ":thumbs_up_dark_skin_tone:"},
      {"\U0001F64F\U0001F3FD", ":folded_hands_medium_skin_tone:"},
      {"\U0001F937\U0000200D\U00002640\U0000FE0F", ":woman_shrugging:"},
      {"\U0001F937\U0000200D\U00002642\U0000FE0F", ":man_shrugging:"},
      {"\U0001F926\U0000200D\U00002640\U0000FE0F", ":woman_facepalming:"},
      {"\U0001F926\U0000200D\U00002642\U0000FE0F", ":man_facepalming:"},
      {"\U0001F1FA\U0001F1F8", ":flag_united_states:"},
      {"\U0001F1EC\U0001F1E7", ":flag_united_kingdom:"},
  };
  return entries;
}

}  // namespace gifrank
